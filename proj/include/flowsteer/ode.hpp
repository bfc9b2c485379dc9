#pragma once

#include <cstddef>
#include <vector>

#include "flowsteer/point_set.hpp"
#include "flowsteer/velocity_model.hpp"

namespace flowsteer {

/// Batch states at t = k / n_steps, k = 0..n_steps.
struct Trajectory {
  std::vector<PointSet> states;

  const PointSet& final_state() const { return states.back(); }
};

/// Explicit Euler from t = 0 to t = 1 with dt = 1 / n_steps.
/// Throws NumericError if a state becomes non-finite.
Trajectory integrate_ode(const VelocityField& field, const PointSet& x0, std::size_t n_steps);

/// Same integration, keeping only the terminal batch.
PointSet integrate_ode_final(const VelocityField& field, const PointSet& x0, std::size_t n_steps);

}  // namespace flowsteer

#include "flowsteer/ode.hpp"

#include <string>

#include "flowsteer/error.hpp"
#include "flowsteer/kernels.hpp"

namespace flowsteer {
namespace {

template <typename OnState>
void run_euler(const VelocityField& field, const PointSet& x0, std::size_t n_steps, OnState&& on_state) {
  if (n_steps == 0) throw DomainError("integrate_ode: n_steps must be >= 1");
  if (x0.dim() != field.dim()) throw DomainError("integrate_ode: state dimension does not match field");
  const double dt = 1.0 / static_cast<double>(n_steps);
  PointSet x = x0, v(x0.size(), x0.dim());
  on_state(x);
  for (std::size_t k = 0; k < n_steps; ++k) {
    field.evaluate_at(x, static_cast<double>(k) * dt, v);
    kernels::axpy(x.flat().size(), dt, v.flat().data(), x.flat().data());
    if (!x.all_finite()) throw NumericError("integrate_ode: non-finite state after step " + std::to_string(k));
    on_state(x);
  }
}

}  // namespace

Trajectory integrate_ode(const VelocityField& field, const PointSet& x0, std::size_t n_steps) {
  Trajectory traj;
  traj.states.reserve(n_steps + 1);
  run_euler(field, x0, n_steps, [&](const PointSet& x) { traj.states.push_back(x); });
  return traj;
}

PointSet integrate_ode_final(const VelocityField& field, const PointSet& x0, std::size_t n_steps) {
  PointSet last;
  run_euler(field, x0, n_steps, [&](const PointSet& x) { last = x; });
  return last;
}

}  // namespace flowsteer

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

namespace flowsteer {

/// Energy U: R^d -> R used to tilt p_1 towards p_1 exp(-lambda U).
struct Potential {
  std::string name;
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> energy;

  double operator()(std::span<const double> x) const { return energy(x); }
};

/// w (1 - 1[x in [0, inf)^d]); the orthant is closed, so x_i = 0 counts as inside.
double indicator_potential(std::span<const double> x, double w);

/// w sum_i max(0, -x_i)
double distance_potential(std::span<const double> x, double w);

/// w max(0, -x[axis]): distance to the half-space {x[axis] >= 0}.
double halfspace_distance_potential(std::span<const double> x, double w, std::size_t axis);

Potential make_indicator_potential(std::size_t dim, double w);
Potential make_distance_potential(std::size_t dim, double w);
Potential make_halfspace_potential(std::size_t dim, double w, std::size_t axis);

}  // namespace flowsteer

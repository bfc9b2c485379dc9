#include "flowsteer/potentials.hpp"

#include <algorithm>

#include "flowsteer/error.hpp"

namespace flowsteer {

double indicator_potential(std::span<const double> x, double w) {
  for (double xi : x)
    if (!(xi >= 0.0)) return w;
  return 0.0;
}

double distance_potential(std::span<const double> x, double w) {
  double s = 0.0;
  for (double xi : x) s += std::max(0.0, -xi);
  return w * s;
}

double halfspace_distance_potential(std::span<const double> x, double w, std::size_t axis) {
  if (axis >= x.size()) throw DomainError("half-space potential: axis out of range");
  return w * std::max(0.0, -x[axis]);
}

namespace {
void check_weight(double w) {
  if (!(w > 0.0)) throw DomainError("potential weight must be positive");
}
}  // namespace

Potential make_indicator_potential(std::size_t dim, double w) {
  check_weight(w);
  return {"indicator", dim, [w](std::span<const double> x) { return indicator_potential(x, w); }};
}

Potential make_distance_potential(std::size_t dim, double w) {
  check_weight(w);
  return {"distance", dim, [w](std::span<const double> x) { return distance_potential(x, w); }};
}

Potential make_halfspace_potential(std::size_t dim, double w, std::size_t axis) {
  check_weight(w);
  if (axis >= dim) throw DomainError("half-space potential: axis out of range");
  return {"halfspace", dim, [w, axis](std::span<const double> x) { return halfspace_distance_potential(x, w, axis); }};
}

}  // namespace flowsteer

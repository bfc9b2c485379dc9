#pragma once

#include <cstddef>
#include <vector>

#include "flowsteer/point_set.hpp"
#include "flowsteer/rng.hpp"

namespace flowsteer {

/// n_proj uniformly random unit vectors in R^d, one per row.
PointSet random_directions(std::size_t d, std::size_t n_proj, Rng& rng);

/// Square root of the mean squared 1D Wasserstein-2 distance between the
/// projections of A and B onto `directions`. Empirical quantiles are compared
/// at the levels (k + 1/2) / N, N = max(|A|, |B|).
double sliced_w2(const PointSet& a, const PointSet& b, const PointSet& directions);
double sliced_w2(const PointSet& a, const PointSet& b, std::size_t n_proj, Rng& rng);

/// A fixed reference set with its sorted projections precomputed, for
/// repeated sliced-W2 evaluations against the same set and directions.
class SlicedReference {
 public:
  SlicedReference(const PointSet& reference, PointSet directions);

  std::size_t size() const { return n_; }
  const PointSet& directions() const { return directions_; }
  /// Same value as sliced_w2(a, reference, directions).
  double distance(const PointSet& a) const;

 private:
  std::size_t n_;
  PointSet directions_;
  std::vector<double> directions_t_;
  std::vector<double> sorted_;  // one row of n_ values per direction
};

/// Fraction of rows with every coordinate >= 0.
double success_rate(const PointSet& samples);

}  // namespace flowsteer

#include "flowsteer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "flowsteer/error.hpp"
#include "flowsteer/kernels.hpp"

namespace flowsteer {

PointSet random_directions(std::size_t d, std::size_t n_proj, Rng& rng) {
  if (d == 0 || n_proj == 0) throw DomainError("random_directions: d and n_proj must be >= 1");
  PointSet dirs(n_proj, d);
  for (std::size_t p = 0; p < n_proj; ++p) {
    auto row = dirs.row(p);
    double norm = 0.0;
    do {
      rng.fill_normal(row);
      norm = std::sqrt(kernels::dot(d, row.data(), row.data()));
    } while (norm < 1e-12);
    for (double& v : row) v /= norm;
  }
  return dirs;
}

namespace {

constexpr std::size_t kProjectionChunk = 128;

// Sorted projections of `points` onto directions [p0, p0 + np), one row per direction.
std::vector<double> sorted_projections(const PointSet& points, const std::vector<double>& dirs_t, std::size_t p0,
                                       std::size_t np, std::size_t n_proj) {
  const std::size_t n = points.size(), d = points.dim();
  std::vector<double> proj(n * np, 0.0), out(np * n);
  kernels::gemm_acc(n, np, d, points.flat().data(), d, dirs_t.data() + p0, n_proj, proj.data(), np);
  kernels::transpose(n, np, proj.data(), out.data());
  for (std::size_t p = 0; p < np; ++p) std::sort(out.begin() + p * n, out.begin() + (p + 1) * n);
  return out;
}

// Squared 1D W2 between sorted samples ra (m) and rb (n), quantile levels
// (k + 1/2) / max(m, n).
double sorted_w2_squared(const double* ra, std::size_t m, const double* rb, std::size_t n) {
  const std::size_t levels = std::max(m, n);
  double acc = 0.0;
  for (std::size_t k = 0; k < levels; ++k) {
    const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(levels);
    const std::size_t ia = std::min(m - 1, static_cast<std::size_t>(u * static_cast<double>(m)));
    const std::size_t ib = std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
    const double diff = ra[ia] - rb[ib];
    acc += diff * diff;
  }
  return acc / static_cast<double>(levels);
}

std::vector<double> transposed(const PointSet& directions) {
  std::vector<double> t(directions.flat().size());
  kernels::transpose(directions.size(), directions.dim(), directions.flat().data(), t.data());
  return t;
}

}  // namespace

SlicedReference::SlicedReference(const PointSet& reference, PointSet directions)
    : n_(reference.size()), directions_(std::move(directions)) {
  if (reference.empty()) throw DomainError("SlicedReference: empty reference set");
  if (directions_.empty() || directions_.dim() != reference.dim())
    throw DomainError("SlicedReference: directions do not match the reference dimension");
  const std::size_t n_proj = directions_.size();
  directions_t_ = transposed(directions_);
  sorted_.resize(n_proj * n_);
  for (std::size_t p0 = 0; p0 < n_proj; p0 += kProjectionChunk) {
    const std::size_t np = std::min(kProjectionChunk, n_proj - p0);
    const auto chunk = sorted_projections(reference, directions_t_, p0, np, n_proj);
    std::copy(chunk.begin(), chunk.end(), sorted_.begin() + static_cast<std::ptrdiff_t>(p0 * n_));
  }
}

double SlicedReference::distance(const PointSet& a) const {
  if (a.empty()) throw DomainError("sliced_w2: empty point set");
  if (a.dim() != directions_.dim()) throw DomainError("sliced_w2: dimension mismatch");
  const std::size_t m = a.size(), n_proj = directions_.size();
  double total = 0.0;
  for (std::size_t p0 = 0; p0 < n_proj; p0 += kProjectionChunk) {
    const std::size_t np = std::min(kProjectionChunk, n_proj - p0);
    const auto pa = sorted_projections(a, directions_t_, p0, np, n_proj);
    for (std::size_t p = 0; p < np; ++p)
      total += sorted_w2_squared(pa.data() + p * m, m, sorted_.data() + (p0 + p) * n_, n_);
  }
  return std::sqrt(total / static_cast<double>(n_proj));
}

double sliced_w2(const PointSet& a, const PointSet& b, const PointSet& directions) {
  if (a.empty() || b.empty()) throw DomainError("sliced_w2: empty point set");
  if (a.dim() != b.dim() || a.dim() != directions.dim()) throw DomainError("sliced_w2: dimension mismatch");
  if (directions.empty()) throw DomainError("sliced_w2: no projections");
  const std::size_t m = a.size(), n = b.size(), n_proj = directions.size();
  const auto dirs_t = transposed(directions);
  double total = 0.0;
  for (std::size_t p0 = 0; p0 < n_proj; p0 += kProjectionChunk) {
    const std::size_t np = std::min(kProjectionChunk, n_proj - p0);
    const auto pa = sorted_projections(a, dirs_t, p0, np, n_proj);
    const auto pb = sorted_projections(b, dirs_t, p0, np, n_proj);
    for (std::size_t p = 0; p < np; ++p) total += sorted_w2_squared(pa.data() + p * m, m, pb.data() + p * n, n);
  }
  return std::sqrt(total / static_cast<double>(n_proj));
}

double sliced_w2(const PointSet& a, const PointSet& b, std::size_t n_proj, Rng& rng) {
  if (a.dim() != b.dim()) throw DomainError("sliced_w2: dimension mismatch");
  return sliced_w2(a, b, random_directions(a.dim(), n_proj, rng));
}

double success_rate(const PointSet& samples) {
  if (samples.empty()) throw DomainError("success_rate: empty batch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto r = samples.row(i);
    if (std::all_of(r.begin(), r.end(), [](double v) { return v >= 0.0; })) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

}  // namespace flowsteer

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flowsteer {

/// n points in R^d, stored row-major.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t n, std::size_t d) : n_(n), d_(d), data_(n * d, 0.0) {}
  PointSet(std::size_t n, std::size_t d, std::vector<double> data);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }
  bool empty() const { return n_ == 0; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * d_, d_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * d_, d_}; }
  double& at(std::size_t i, std::size_t j) { return data_[i * d_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * d_ + j]; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  /// Rows selected by `indices`, in that order.
  PointSet gather(std::span<const std::size_t> indices) const;
  std::vector<double> mean() const;
  bool all_finite() const;

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> data_;
};

/// One point per row, comma separated, no header.
PointSet read_points_csv(const std::string& path);
void write_points_csv(const std::string& path, const PointSet& points);

}  // namespace flowsteer

#include "flowsteer/point_set.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "flowsteer/error.hpp"
#include "format.hpp"

namespace flowsteer {

PointSet::PointSet(std::size_t n, std::size_t d, std::vector<double> data)
    : n_(n), d_(d), data_(std::move(data)) {
  if (data_.size() != n * d) throw DomainError("PointSet: data size does not match n*d");
}

PointSet PointSet::gather(std::span<const std::size_t> indices) const {
  PointSet out(indices.size(), d_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::vector<double> PointSet::mean() const {
  std::vector<double> m(d_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < d_; ++j) m[j] += at(i, j);
  if (n_ > 0)
    for (auto& v : m) v /= static_cast<double>(n_);
  return m;
}

bool PointSet::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

PointSet read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open point file '" + path + "'");
  std::vector<double> values;
  std::size_t d = 0, n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::size_t cols = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      values.push_back(detail::parse_double(cell, path));
      ++cols;
    }
    if (n == 0) d = cols;
    if (cols != d)
      throw ConfigError(path + ": row " + std::to_string(n + 1) + " has " + std::to_string(cols) +
                        " columns, expected " + std::to_string(d));
    ++n;
  }
  return PointSet(n, d, std::move(values));
}

void write_points_csv(const std::string& path, const PointSet& points) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  std::string line;
  for (std::size_t i = 0; i < points.size(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < points.dim(); ++j) {
      if (j) line += ',';
      detail::append_double(line, points.at(i, j));
    }
    line += '\n';
    out << line;
  }
}

}  // namespace flowsteer

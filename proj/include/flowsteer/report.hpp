#pragma once

// Benchmark results: one record per (group, method, variant, repeat), with
// summaries over repeats. Files written from a report depend only on the
// configuration and seeds; wall-clock times go to a separate timing file.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace flowsteer {

struct ReportRun {
  std::string group;    // dimension or dataset pair
  std::string method;   // FK, IS, unsteered, ...
  std::string variant;  // potential, particle count, model kind, ...
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
  double runtime_seconds = 0.0;
};

struct MetricSummary {
  std::size_t count = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
};

/// Linearly interpolated quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);
MetricSummary summarize(std::span<const double> values);

class BenchmarkReport {
 public:
  BenchmarkReport() = default;
  BenchmarkReport(std::string experiment, nlohmann::json config)
      : experiment_(std::move(experiment)), config_(std::move(config)) {}

  const std::string& experiment() const { return experiment_; }
  const nlohmann::json& config() const { return config_; }
  const std::vector<ReportRun>& runs() const { return runs_; }

  void add(ReportRun run) { runs_.push_back(std::move(run)); }
  void merge(const BenchmarkReport& other);

  /// Values of `metric` over the matching runs, in insertion order.
  std::vector<double> values(const std::string& group, const std::string& method, const std::string& variant,
                             const std::string& metric) const;
  MetricSummary summary(const std::string& group, const std::string& method, const std::string& variant,
                        const std::string& metric) const;

  /// FNV-1a of the serialized configuration.
  std::uint64_t config_hash() const;
  nlohmann::json to_json() const;

  /// Writes <dir>/<experiment>.json, _runs.csv (long format), _summary.csv
  /// and _timing.csv. Returns the paths written.
  std::vector<std::string> write(const std::string& dir) const;

 private:
  std::string experiment_;
  nlohmann::json config_;
  std::vector<ReportRun> runs_;
};

}  // namespace flowsteer

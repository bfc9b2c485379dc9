#include "flowsteer/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>

#include "flowsteer/error.hpp"
#include "format.hpp"

namespace flowsteer {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> v(values.begin(), values.end());
  s.median = quantile(v, 0.5);
  s.q1 = quantile(v, 0.25);
  s.q3 = quantile(v, 0.75);
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

void BenchmarkReport::merge(const BenchmarkReport& other) {
  runs_.insert(runs_.end(), other.runs_.begin(), other.runs_.end());
}

std::vector<double> BenchmarkReport::values(const std::string& group, const std::string& method,
                                            const std::string& variant, const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : runs_) {
    if (r.group != group || r.method != method || r.variant != variant) continue;
    if (auto it = r.metrics.find(metric); it != r.metrics.end()) out.push_back(it->second);
  }
  return out;
}

MetricSummary BenchmarkReport::summary(const std::string& group, const std::string& method,
                                       const std::string& variant, const std::string& metric) const {
  return summarize(values(group, method, variant, metric));
}

std::uint64_t BenchmarkReport::config_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

using Key = std::tuple<std::string, std::string, std::string, std::string>;

// (group, method, variant, metric) in first-seen order.
std::vector<Key> summary_keys(const std::vector<ReportRun>& runs) {
  std::vector<Key> keys;
  std::set<Key> seen;
  for (const auto& r : runs)
    for (const auto& [metric, value] : r.metrics) {
      Key k{r.group, r.method, r.variant, metric};
      if (seen.insert(k).second) keys.push_back(k);
    }
  return keys;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

}  // namespace

nlohmann::json BenchmarkReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [group, method, variant, metric] : summary_keys(runs_)) {
    const auto s = summary(group, method, variant, metric);
    rows.push_back({{"group", group},
                    {"method", method},
                    {"variant", variant},
                    {"metric", metric},
                    {"count", s.count},
                    {"median", s.median},
                    {"q1", s.q1},
                    {"q3", s.q3},
                    {"mean", s.mean},
                    {"std", s.stddev}});
  }
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& r : runs_)
    seeds.push_back({{"group", r.group}, {"method", r.method}, {"variant", r.variant}, {"repeat", r.repeat},
                     {"seed", r.seed}});
  return {{"experiment", experiment_},
          {"config_hash", hex64(config_hash())},
          {"config", config_},
          {"rows", rows},
          {"runs", seeds}};
}

std::vector<std::string> BenchmarkReport::write(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  const std::string base = (std::filesystem::path(dir) / experiment_).string();
  std::vector<std::string> written;

  {
    auto out = open_for_write(base + ".json");
    out << to_json().dump(2) << '\n';
    written.push_back(base + ".json");
  }
  {
    auto out = open_for_write(base + "_runs.csv");
    out << "experiment,group,method,variant,repeat,seed,metric,value\n";
    for (const auto& r : runs_)
      for (const auto& [metric, value] : r.metrics)
        out << experiment_ << ',' << r.group << ',' << r.method << ',' << r.variant << ',' << r.repeat << ','
            << r.seed << ',' << metric << ',' << detail::format_double(value) << '\n';
    written.push_back(base + "_runs.csv");
  }
  {
    auto out = open_for_write(base + "_summary.csv");
    out << "group,method,variant,metric,count,median,q1,q3,mean,std\n";
    for (const auto& [group, method, variant, metric] : summary_keys(runs_)) {
      const auto s = summary(group, method, variant, metric);
      out << group << ',' << method << ',' << variant << ',' << metric << ',' << s.count << ','
          << detail::format_double(s.median) << ',' << detail::format_double(s.q1) << ','
          << detail::format_double(s.q3) << ',' << detail::format_double(s.mean) << ','
          << detail::format_double(s.stddev) << '\n';
    }
    written.push_back(base + "_summary.csv");
  }
  {
    auto out = open_for_write(base + "_timing.csv");
    out << "group,method,variant,repeat,runtime_seconds\n";
    for (const auto& r : runs_)
      out << r.group << ',' << r.method << ',' << r.variant << ',' << r.repeat << ','
          << detail::format_double(r.runtime_seconds) << '\n';
    written.push_back(base + "_timing.csv");
  }
  return written;
}

}  // namespace flowsteer

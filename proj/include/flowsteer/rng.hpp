#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace flowsteer {

/// Random stream with an explicit key. Streams derived from the same seed but
/// different keys are statistically independent, which is how per-particle and
/// per-run substreams are obtained without any shared global state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  /// Child stream keyed by this stream's key path plus `keys`.
  Rng split(std::initializer_list<std::uint64_t> keys) const;

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  bool coin() { return (engine_() >> 63) != 0; }

  void fill_normal(std::span<double> out);

  std::mt19937_64& engine() { return engine_; }

 private:
  Rng(std::uint64_t seed, std::uint64_t path_hash);

  std::uint64_t seed_;
  std::uint64_t path_hash_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace flowsteer

#include "flowsteer/rng.hpp"

#include <array>

namespace flowsteer {
namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t k) {
  // splitmix64 finaliser over the running hash
  std::uint64_t z = h ^ (k + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t path_hash) {
  std::array<std::uint32_t, 4> words{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(path_hash), static_cast<std::uint32_t>(path_hash >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : Rng(seed, std::uint64_t{0x5eedULL}) {}

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
    : Rng(seed, [&] {
        std::uint64_t h = 0x5eedULL;
        for (auto k : keys) h = mix(h, k);
        return h;
      }()) {}

Rng::Rng(std::uint64_t seed, std::uint64_t path_hash)
    : seed_(seed), path_hash_(path_hash), engine_(seeded_engine(seed, path_hash)) {}

Rng Rng::split(std::initializer_list<std::uint64_t> keys) const {
  std::uint64_t h = path_hash_;
  for (auto k : keys) h = mix(h, k);
  return Rng(seed_, h);
}

std::size_t Rng::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

void Rng::fill_normal(std::span<double> out) {
  for (auto& v : out) v = normal_(engine_);
}

}  // namespace flowsteer

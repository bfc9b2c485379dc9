#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "flowsteer/kernels.hpp"
#include "flowsteer/rng.hpp"
#include "flowsteer/velocity_model.hpp"

using namespace flowsteer;

namespace {

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// Restores the startup dispatch when a test switches ISA.
struct IsaGuard {
  kernels::Isa saved = kernels::active().isa;
  ~IsaGuard() { kernels::set_active(saved); }
};

bool has_avx2() { return kernels::supported(kernels::Isa::avx2); }

}  // namespace

TEST_CASE("scalar table is always available and listed first") {
  auto isas = kernels::available();
  REQUIRE_FALSE(isas.empty());
  CHECK(isas.front() == kernels::Isa::scalar);
  CHECK(kernels::table(kernels::Isa::scalar).name == "scalar");
}

TEST_CASE("gemm_acc scalar reference against a naive triple loop") {
  Rng rng(3);
  const auto& k = kernels::table(kernels::Isa::scalar);
  for (std::size_t m : {1u, 3u, 7u}) {
    for (std::size_t n : {1u, 4u, 9u}) {
      for (std::size_t kk : {1u, 5u, 16u}) {
        auto a = random_vector(m * kk, rng), b = random_vector(kk * n, rng), c = random_vector(m * n, rng);
        auto expect = c;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < kk; ++p) expect[i * n + j] += a[i * kk + p] * b[p * n + j];
        k.gemm_acc(m, n, kk, a.data(), kk, b.data(), n, c.data(), n);
        for (std::size_t i = 0; i < m * n; ++i) CHECK(c[i] == doctest::Approx(expect[i]).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!has_avx2()) {
    MESSAGE("AVX2 not supported on this CPU; equivalence test skipped");
    return;
  }
  const auto& s = kernels::table(kernels::Isa::scalar);
  const auto& v = kernels::table(kernels::Isa::avx2);
  Rng rng(11);

  SUBCASE("gemm_acc over ragged shapes") {
    for (std::size_t m : {1u, 2u, 5u, 8u, 13u}) {
      for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 17u, 33u}) {
        for (std::size_t kk : {1u, 2u, 6u, 31u}) {
          auto a = random_vector(m * kk, rng), b = random_vector(kk * n, rng), c0 = random_vector(m * n, rng);
          auto c1 = c0;
          s.gemm_acc(m, n, kk, a.data(), kk, b.data(), n, c0.data(), n);
          v.gemm_acc(m, n, kk, a.data(), kk, b.data(), n, c1.data(), n);
          for (std::size_t i = 0; i < m * n; ++i) CHECK(c1[i] == doctest::Approx(c0[i]).epsilon(1e-12));
        }
      }
    }
  }
  SUBCASE("vector kernels at every tail length") {
    for (std::size_t n = 0; n <= 37; ++n) {
      auto x = random_vector(n, rng), y0 = random_vector(n, rng);
      auto y1 = y0;
      s.axpy(n, 0.7, x.data(), y0.data());
      v.axpy(n, 0.7, x.data(), y1.data());
      for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y0[i]).epsilon(1e-14));
      CHECK(v.dot(n, x.data(), y0.data()) == doctest::Approx(s.dot(n, x.data(), y0.data())).epsilon(1e-12));
      CHECK(v.squared_distance(n, x.data(), y0.data()) ==
            doctest::Approx(s.squared_distance(n, x.data(), y0.data())).epsilon(1e-12));
    }
  }
  SUBCASE("adam step") {
    for (std::size_t n : {1u, 4u, 9u, 64u}) {
      auto p0 = random_vector(n, rng), g = random_vector(n, rng), m0 = random_vector(n, rng);
      std::vector<double> v0(n);
      for (auto& x : v0) x = rng.uniform(0.0, 1.0);
      auto p1 = p0, m1 = m0, v1 = v0;
      s.adam_step(n, p0.data(), g.data(), m0.data(), v0.data(), 1e-3, 0.9, 0.999, 1e-8, 0.5, 0.3);
      v.adam_step(n, p1.data(), g.data(), m1.data(), v1.data(), 1e-3, 0.9, 0.999, 1e-8, 0.5, 0.3);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(p1[i] == doctest::Approx(p0[i]).epsilon(1e-13));
        CHECK(m1[i] == doctest::Approx(m0[i]).epsilon(1e-13));
        CHECK(v1[i] == doctest::Approx(v0[i]).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("gemm rows do not depend on the other rows of the batch") {
  Rng rng(5);
  for (auto isa : kernels::available()) {
    const auto& k = kernels::table(isa);
    const std::size_t m = 11, n = 19, kk = 23;
    auto a = random_vector(m * kk, rng), b = random_vector(kk * n, rng);
    std::vector<double> batch(m * n, 0.0);
    k.gemm_acc(m, n, kk, a.data(), kk, b.data(), n, batch.data(), n);
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> single(n, 0.0);
      k.gemm_acc(1, n, kk, a.data() + i * kk, kk, b.data(), n, single.data(), n);
      CHECK(std::equal(single.begin(), single.end(), batch.begin() + static_cast<std::ptrdiff_t>(i * n)));
    }
  }
}

TEST_CASE("model evaluation agrees across ISAs and is row independent") {
  IsaGuard guard;
  ModelSpec spec{.dim = 3, .hidden = {16, 24}, .activation = Activation::silu, .score_head = true};
  VelocityModel model(spec, 42);
  Rng rng(8);
  const std::size_t batch = 9;
  auto x = random_vector(batch * 3, rng);
  std::vector<double> t(batch);
  for (auto& ti : t) ti = rng.uniform();

  std::vector<std::vector<double>> velocities;
  for (auto isa : kernels::available()) {
    kernels::set_active(isa);
    std::vector<double> v(batch * 3), s(batch * 3);
    model.evaluate(x, t, v, s);
    for (std::size_t i = 0; i < batch; ++i) {
      std::vector<double> vi(3), si(3);
      model.evaluate(std::span<const double>(x).subspan(i * 3, 3), std::span<const double>(t).subspan(i, 1), vi,
                     si);
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(vi[j] == v[i * 3 + j]);
        CHECK(si[j] == s[i * 3 + j]);
      }
    }
    velocities.push_back(v);
  }
  for (std::size_t r = 1; r < velocities.size(); ++r)
    for (std::size_t i = 0; i < velocities[0].size(); ++i)
      CHECK(velocities[r][i] == doctest::Approx(velocities[0][i]).epsilon(1e-12));
}

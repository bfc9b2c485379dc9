#include <doctest.h>

#include <cmath>
#include <vector>

#include "flowsteer/datasets.hpp"
#include "flowsteer/error.hpp"
#include "flowsteer/ode.hpp"
#include "flowsteer/score_sde.hpp"
#include "flowsteer/velocity_model.hpp"

using namespace flowsteer;

namespace {

// Exact marginal velocity of the OT path from N(0, I) to N(mu, I) with
// independent coupling: x_t ~ N(t mu, ((1-t)^2 + t^2) I) and
// E[x1 - x0 | x_t] = mu + (2t - 1) / var_t (x_t - t mu).
struct GaussianPathField final : VelocityField {
  std::vector<double> mu;
  std::size_t dim() const override { return mu.size(); }
  static double var(double t) { return (1 - t) * (1 - t) + t * t; }
  void evaluate(std::span<const double> x, std::span<const double> t, std::span<double> v,
                std::span<double>) const override {
    const std::size_t d = mu.size();
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = 0; j < d; ++j)
        v[i * d + j] = mu[j] + (2 * t[i] - 1) / var(t[i]) * (x[i * d + j] - t[i] * mu[j]);
  }
};

}  // namespace

TEST_CASE("gaussian score from velocity: hand examples") {
  std::vector<double> x{1.0, 0.0}, v{0.0, 0.0};
  auto s = gaussian_score_from_velocity(x, v, 0.5);
  CHECK(s[0] == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(s[1] == 0.0);
  for (double t : {0.1, 0.5, 0.9}) {
    std::vector<double> xv{0.3, -2.0}, vv{0.3 / t, -2.0 / t};
    auto z = gaussian_score_from_velocity(xv, vv, t);
    CHECK(std::abs(z[0]) < 1e-12);
    CHECK(std::abs(z[1]) < 1e-12);
  }
  CHECK_THROWS_AS(gaussian_score_from_velocity(x, v, 0.0), SingularityError);
  CHECK_THROWS_AS(gaussian_score_from_velocity(x, v, 1.0), SingularityError);
  CHECK_THROWS_AS(gaussian_score_from_velocity(x, v, 1e-4), SingularityError);
  CHECK_NOTHROW(gaussian_score_from_velocity(x, v, 1e-3));
}

TEST_CASE("gaussian path oracle on the t x lattice grid") {
  for (const std::vector<double>& mu : {std::vector<double>{0.0, 0.0}, std::vector<double>{1.5, -0.7}}) {
    GaussianPathField field;
    field.mu = mu;
    double worst = 0.0;
    for (int ti = 1; ti <= 9; ++ti) {
      const double t = ti / 10.0;
      for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
          std::vector<double> x{-2.0 + a, -2.0 + b}, v(2);
          std::vector<double> tt{t};
          field.evaluate(x, tt, v, {});
          auto s = gaussian_score_from_velocity(x, v, t);
          for (std::size_t j = 0; j < 2; ++j) {
            const double exact = -(x[j] - t * mu[j]) / GaussianPathField::var(t);
            worst = std::max(worst, std::abs(s[j] - exact));
          }
        }
      }
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("corrected drift") {
  std::vector<double> v{1.0, 1.0}, s{2.0, 0.0};
  CHECK(corrected_drift(v, s, 0.0) == v);
  CHECK(corrected_drift(v, s, 1.0) == std::vector<double>{2.0, 1.0});
  std::vector<double> z{0.0}, s4{4.0};
  CHECK(corrected_drift(z, s4, 0.5)[0] == doctest::Approx(0.5));
  std::vector<double> inf{INFINITY};
  CHECK_THROWS_AS(corrected_drift(z, inf, 1.0), NumericError);
}

TEST_CASE("euler maruyama step") {
  std::vector<double> x{0.0}, w{0.0};
  Rng rng(4);
  Rng copy = rng;
  const double xi = copy.normal();
  auto y = euler_maruyama_step(x, w, 1.0, 0.25, rng);
  CHECK(y[0] == doctest::Approx(0.5 * xi).epsilon(1e-15));

  std::vector<double> x2{1.0, 2.0}, w2{3.0, -1.0};
  Rng r2(5);
  auto plain = euler_maruyama_step(x2, w2, 0.0, 0.1, r2);
  CHECK(plain[0] == doctest::Approx(1.3));
  CHECK(plain[1] == doctest::Approx(1.9));

  Rng a(9), b(9);
  CHECK(euler_maruyama_step(x2, w2, 0.7, 0.1, a) == euler_maruyama_step(x2, w2, 0.7, 0.1, b));
  CHECK_THROWS_AS(euler_maruyama_step(x2, w2, 0.7, 0.0, a), DomainError);
}

TEST_CASE("noise schedules") {
  auto lin = NoiseSchedule::linear(0.3);
  CHECK(lin.at(0.0) == doctest::Approx(0.3));
  CHECK(lin.at(0.5) == doctest::Approx(0.15));
  CHECK(lin.at(1.0) == 0.0);
  CHECK_FALSE(lin.is_zero());
  CHECK(NoiseSchedule::constant(0.4).at(0.9) == 0.4);
  CHECK(NoiseSchedule::none().is_zero());
  CHECK_THROWS_AS(NoiseSchedule::linear(-1.0).validate(), DomainError);
  CHECK(parse_noise_kind(to_string(NoiseKind::linear_decay)) == NoiseKind::linear_decay);
  CHECK_THROWS_AS(parse_noise_kind("cosine"), ConfigError);
}

TEST_CASE("zero noise SDE is bit-identical to the ODE") {
  VelocityModel model(ModelSpec{.dim = 3, .hidden = {16, 16}}, 6);
  Rng rng(1);
  auto x0 = draw_points(standard_normal_sampler(), 33, 3, rng);
  for (std::size_t steps : {1u, 10u, 37u}) {
    auto ode = integrate_ode_final(model, x0, steps);
    CHECK(integrate_sde(model, ScoreSource::analytic(), NoiseSchedule::none(), x0, steps, Rng(3)) == ode);
    CHECK(integrate_sde(model, ScoreSource::analytic(), NoiseSchedule::linear(0.0), x0, steps, Rng(3)) == ode);
  }
}

TEST_CASE("SDE samples do not depend on how the batch is split") {
  VelocityModel model(ModelSpec{.dim = 2, .hidden = {16}}, 2);
  Rng rng(8);
  auto x0 = draw_points(standard_normal_sampler(), 20, 2, rng);
  const Rng noise_rng(44);
  auto full = integrate_sde(model, ScoreSource::analytic(), NoiseSchedule::linear(0.5), x0, 25, noise_rng);
  std::vector<std::size_t> head(7);
  for (std::size_t i = 0; i < head.size(); ++i) head[i] = i;
  auto part = integrate_sde(model, ScoreSource::analytic(), NoiseSchedule::linear(0.5), x0.gather(head), 25, noise_rng);
  CHECK(part == full.gather(head));
  CHECK(integrate_sde(model, ScoreSource::analytic(), NoiseSchedule::linear(0.5), x0, 25, noise_rng) == full);
}

TEST_CASE("SDE with the analytic Gaussian velocity keeps the Gaussian marginal") {
  for (const std::vector<double>& mu : {std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, -1.0}}) {
    GaussianPathField field;
    field.mu = mu;
    Rng rng(21);
    auto x0 = draw_points(standard_normal_sampler(), 4096, 2, rng);
    for (auto noise : {NoiseSchedule::constant(1.0), NoiseSchedule::linear(0.8)}) {
      auto x1 = integrate_sde(field, ScoreSource::analytic(), noise, x0, 200, Rng(22));
      auto mean = x1.mean();
      for (std::size_t j = 0; j < 2; ++j) {
        double var = 0.0;
        for (std::size_t i = 0; i < x1.size(); ++i) var += std::pow(x1.at(i, j) - mean[j], 2);
        var /= static_cast<double>(x1.size() - 1);
        CHECK(std::abs(mean[j] - mu[j]) < 0.1);
        CHECK(std::abs(var - 1.0) < 0.15);
      }
    }
  }
}

TEST_CASE("learned score requires a score head") {
  VelocityModel model(ModelSpec{.dim = 1, .hidden = {4}}, 1);
  PointSet x0(2, 1);
  CHECK_THROWS_AS(integrate_sde(model, ScoreSource::learned(), NoiseSchedule::constant(0.5), x0, 3, Rng(1)),
                  DomainError);
}

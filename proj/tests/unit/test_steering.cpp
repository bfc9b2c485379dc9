#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "flowsteer/benchmarks.hpp"
#include "flowsteer/datasets.hpp"
#include "flowsteer/error.hpp"
#include "flowsteer/metrics.hpp"
#include "flowsteer/potentials.hpp"
#include "flowsteer/steering.hpp"
#include "flowsteer/velocity_model.hpp"
#include "stats.hpp"

using namespace flowsteer;

namespace {

// Leaves every point where the prior put it, so terminal samples are prior draws.
struct ZeroField final : VelocityField {
  std::size_t d;
  explicit ZeroField(std::size_t dim) : d(dim) {}
  std::size_t dim() const override { return d; }
  void evaluate(std::span<const double>, std::span<const double>, std::span<double> v,
                std::span<double> s) const override {
    std::fill(v.begin(), v.end(), 0.0);
    std::fill(s.begin(), s.end(), 0.0);
  }
};

const PotentialSchedule kAllSchedules[] = {PotentialSchedule::difference, PotentialSchedule::max,
                                           PotentialSchedule::sum, PotentialSchedule::harmonic_sum};

// Emits the weights of one path exactly as the sampler does and returns their log-product.
double path_log_product(PotentialSchedule kind, double lambda, const std::vector<double>& rewards, double final_u) {
  RewardHistory h;
  const std::size_t L = rewards.size();
  for (std::size_t l = 1; l <= L; ++l) {
    h.rewards.push_back(rewards[l - 1]);
    const auto fin = l == L ? std::optional<double>(final_u) : std::nullopt;
    h.log_weight_sum += schedule_log_weight(kind, lambda, h, l, L, fin);
  }
  return h.log_weight_sum;
}

}  // namespace

TEST_CASE("one-shot terminal estimate") {
  std::vector<double> x{0.4, -0.2}, v{1.0, 2.0};
  CHECK(one_shot_terminal_estimate(x, v, 1.0) == x);
  std::vector<double> z{0.0, 0.0}, three{3.0, 3.0}, two{2.0, 2.0};
  CHECK(one_shot_terminal_estimate(z, three, 0.0) == three);
  CHECK(one_shot_terminal_estimate(z, two, 0.5) == std::vector<double>{1.0, 1.0});
  CHECK(one_shot_estimate(z, two, 0.25) == std::vector<double>{0.5, 0.5});
}

TEST_CASE("second-order terminal estimate") {
  std::vector<double> x{0.0}, v{2.0}, vp{0.0};
  CHECK(second_order_terminal_estimate(x, v, vp, 0.5, 0.25)[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(second_order_terminal_estimate(x, v, v, 0.5, 0.25) == one_shot_terminal_estimate(x, v, 0.5));
  std::vector<double> x2{0.7, -1.0}, v2{1.0, 5.0}, vp2{-3.0, 2.0};
  CHECK(second_order_terminal_estimate(x2, v2, vp2, 1.0, 0.9) == x2);
  CHECK_THROWS_AS(second_order_terminal_estimate(x, v, vp, 0.5, 0.25, true), ContractViolation);
  CHECK_THROWS_AS(second_order_terminal_estimate(x, v, vp, 0.5, 0.5), DomainError);
}

TEST_CASE("harmonic scales sum to one over the planned events") {
  for (std::size_t L : {1u, 2u, 5u, 17u}) {
    double acc = 0.0;
    for (std::size_t l = 1; l <= L; ++l) acc += harmonic_reward_scale(l, L);
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-14));
    double h = 0.0;
    for (std::size_t m = 1; m <= L; ++m) h += 1.0 / static_cast<double>(m);
    CHECK(harmonic_reward_scale(L, L) == doctest::Approx(1.0 / h));
  }
}

TEST_CASE("schedule weights: hand values and no tilt") {
  RewardHistory h{{1.0, 3.0, 2.0}, 0.0};
  CHECK(schedule_log_weight(PotentialSchedule::difference, 2.0, h, 1, 3) == doctest::Approx(-2.0));
  CHECK(schedule_log_weight(PotentialSchedule::difference, 2.0, h, 2, 3) == doctest::Approx(-4.0));
  CHECK(schedule_log_weight(PotentialSchedule::max, 1.0, h, 3, 4) == doctest::Approx(-3.0));
  CHECK(schedule_log_weight(PotentialSchedule::sum, 1.0, h, 3, 4) == doctest::Approx(-6.0));
  for (auto kind : kAllSchedules)
    for (std::size_t l = 1; l <= 3; ++l) CHECK(schedule_weight(kind, 0.0, h, l, 3) == 1.0);
  RewardHistory empty;
  CHECK_THROWS_AS(schedule_log_weight(PotentialSchedule::sum, 1.0, empty, 1, 3), DomainError);
}

TEST_CASE("emitted weights telescope to exp(-lambda U) for every schedule") {
  Rng rng(101);
  for (auto kind : kAllSchedules) {
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t L = 1 + rng.index(20);
      std::vector<double> r(L);
      for (auto& v : r) v = rng.uniform(0.0, 30.0);
      const double u = rng.uniform(0.0, 30.0), lambda = rng.uniform(0.0, 5.0);
      CHECK(std::abs(path_log_product(kind, lambda, r, u) + lambda * u) <= 1e-9);
    }
  }
}

TEST_CASE("normalized weights use max subtraction") {
  std::vector<double> lw{-1000.0, -1001.0, -1e300};
  auto w = normalized_weights(lw);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == doctest::Approx(std::exp(-1.0)));
  CHECK(w[2] == 0.0);
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> dead{ninf, ninf};
  CHECK_THROWS_AS(normalized_weights(dead), DegenerateEnsembleError);
  std::vector<double> nan{0.0, std::nan("")};
  CHECK_THROWS_AS(normalized_weights(nan), DegenerateEnsembleError);
  std::vector<double> pinf{0.0, INFINITY};
  CHECK_THROWS_AS(normalized_weights(pinf), DegenerateEnsembleError);
}

TEST_CASE("multinomial resampling: uniform weights pass the chi-square test") {
  const std::size_t S = 8, trials = 100000;
  std::vector<double> w(S, 1.0), counts(S, 0.0);
  Rng rng(555);
  for (std::size_t k = 0; k < trials; ++k)
    for (std::size_t i : multinomial_resample(w, rng)) counts[i] += 1.0;
  std::vector<double> expected(S, static_cast<double>(trials));
  const double p = testing::chi2_p_value(counts, expected);
  MESSAGE("uniform chi-square p = " << p);
  CHECK(p > 0.001);
}

TEST_CASE("multinomial resampling: counts are proportional to weights") {
  std::vector<double> w{1.0, 2.0, 3.0, 4.0, 0.0, 0.5};
  const double total = 10.5;
  const std::size_t trials = 100000;
  std::vector<double> counts(w.size(), 0.0);
  Rng rng(556);
  for (std::size_t k = 0; k < trials; ++k)
    for (std::size_t i : multinomial_resample(w, rng)) counts[i] += 1.0;
  CHECK(counts[4] == 0.0);
  std::vector<double> obs, exp;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    obs.push_back(counts[i]);
    exp.push_back(static_cast<double>(trials * w.size()) * w[i] / total);
  }
  const double p = testing::chi2_p_value(obs, exp);
  MESSAGE("proportionality chi-square p = " << p);
  CHECK(p > 0.001);
}

TEST_CASE("resampling edge cases") {
  Rng rng(1);
  std::vector<double> one{0.0, 0.0, 2.0, 0.0};
  for (std::size_t i : multinomial_resample(one, rng)) CHECK(i == 2);
  for (std::size_t i : systematic_resample(one, rng)) CHECK(i == 2);
  std::vector<double> single{0.3};
  CHECK(multinomial_resample(single, rng) == std::vector<std::size_t>{0});
  std::vector<double> zeros{0.0, 0.0};
  CHECK_THROWS_AS(multinomial_resample(zeros, rng), DegenerateEnsembleError);
  Rng a(9), b(9);
  std::vector<double> w{0.1, 0.5, 0.2, 0.7};
  CHECK(multinomial_resample(w, a) == multinomial_resample(w, b));
}

TEST_CASE("systematic resampling keeps every count within one of S w_i") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t S = 1 + rng.index(40);
    std::vector<double> w(S);
    double total = 0.0;
    for (auto& v : w) total += (v = rng.uniform());
    std::vector<double> counts(S, 0.0);
    for (std::size_t i : systematic_resample(w, rng)) counts[i] += 1.0;
    for (std::size_t i = 0; i < S; ++i) CHECK(std::abs(counts[i] - S * w[i] / total) < 1.0 + 1e-9);
  }
  std::vector<double> uniform(16, 1.0);
  auto idx = systematic_resample(uniform, rng);
  CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 16);
}

TEST_CASE("effective sample size") {
  for (std::size_t S : {1u, 7u, 64u}) {
    std::vector<double> w(S, 0.37);
    CHECK(effective_sample_size(w) == static_cast<double>(S));
  }
  std::vector<double> one{0.0, 3.0, 0.0};
  CHECK(effective_sample_size(one) == 1.0);
  std::vector<double> w{1.0, 1.0, 2.0};
  CHECK(effective_sample_size(w) == doctest::Approx(16.0 / 6.0));
}

TEST_CASE("steering config") {
  SteeringConfig c{.steps = 10, .resample_every = 3};
  CHECK(c.resampling_events() == 4);
  std::vector<std::size_t> events;
  for (std::size_t k = 0; k < 10; ++k)
    if (c.is_resampling_step(k)) events.push_back(k);
  CHECK(events == std::vector<std::size_t>{2, 5, 8, 9});
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS((SteeringConfig{.particles = 0}).validate(), DomainError);
  CHECK_THROWS_AS((SteeringConfig{.steps = 5, .resample_every = 6}).validate(), DomainError);
  CHECK(parse_potential_schedule("harmonic_sum") == PotentialSchedule::harmonic_sum);
  CHECK_THROWS_AS(parse_potential_schedule("geometric"), ConfigError);
}

TEST_CASE("fk_sample: surviving paths telescope for every schedule and estimate") {
  VelocityModel model(ModelSpec{.dim = 2, .hidden = {16, 16}}, 31);
  const auto potential = make_distance_potential(2, 3.0);
  for (auto kind : kAllSchedules) {
    for (auto est : {EstimateOrder::zeroth, EstimateOrder::one_shot, EstimateOrder::second_order}) {
      for (bool deterministic : {false, true}) {
        if (est == EstimateOrder::second_order && !deterministic) continue;
        SteeringConfig cfg{.lambda = 1.7, .schedule = kind, .particles = 24, .steps = 10, .resample_every = 3,
                           .estimate = est, .deterministic = deterministic};
        auto res = fk_sample(model, ScoreSource::analytic(), NoiseSchedule::linear(0.5), potential, cfg,
                             standard_normal_sampler(), Rng(4));
        REQUIRE(res.path_log_weights.size() == 24);
        double worst = 0.0;
        for (std::size_t s = 0; s < 24; ++s)
          worst = std::max(worst, std::abs(res.path_log_weights[s] + cfg.lambda * res.final_energies[s]));
        CHECK(worst <= 1e-9);
        CHECK(res.events.size() == 4);
      }
    }
  }
}

TEST_CASE("fk_sample rejects the second-order estimate across diffusive steps") {
  VelocityModel model(ModelSpec{.dim = 1, .hidden = {4}}, 1);
  SteeringConfig cfg{.particles = 4, .steps = 6, .resample_every = 2, .estimate = EstimateOrder::second_order};
  CHECK_THROWS_AS(fk_sample(model, ScoreSource::analytic(), NoiseSchedule::constant(0.5),
                            make_distance_potential(1, 1.0), cfg, standard_normal_sampler(), Rng(1)),
                  ContractViolation);
}

TEST_CASE("fk_sample is deterministic and ancestry identifies the prior draw") {
  ZeroField field(3);
  SteeringConfig cfg{.lambda = 2.0, .particles = 16, .steps = 9, .resample_every = 3, .deterministic = true};
  const Rng rng(12);
  const auto pot = make_distance_potential(3, 1.0);
  auto a = fk_sample(field, ScoreSource::analytic(), NoiseSchedule::none(), pot, cfg, standard_normal_sampler(), rng);
  auto b = fk_sample(field, ScoreSource::analytic(), NoiseSchedule::none(), pot, cfg, standard_normal_sampler(), rng);
  CHECK(a.samples == b.samples);
  CHECK(a.ancestry == b.ancestry);
  CHECK(a.log_weight_checksum == b.log_weight_checksum);
  for (std::size_t s = 0; s < 16; ++s) {
    REQUIRE(a.ancestry[s].size() == 4);
    CHECK(a.ancestry[s].back() == s);
    std::vector<double> x0(3);
    Rng stream = rng.split({0, a.ancestry[s].front()});
    standard_normal_sampler()(stream, x0);
    for (std::size_t j = 0; j < 3; ++j) CHECK(a.samples.at(s, j) == x0[j]);
  }
  std::size_t last = 16;
  for (const auto& e : a.events) {
    CHECK(e.distinct_ancestors <= last);
    last = e.distinct_ancestors;
  }
  CHECK(a.distinct_ancestors() == last);
}

TEST_CASE("fk_sample with a single particle returns its own path") {
  ZeroField field(2);
  SteeringConfig cfg{.particles = 1, .steps = 4, .resample_every = 2};
  auto res = fk_sample(field, ScoreSource::analytic(), NoiseSchedule::none(), make_indicator_potential(2, 5.0), cfg,
                       standard_normal_sampler(), Rng(3));
  CHECK(res.ancestry[0] == std::vector<std::size_t>{0, 0, 0});
  CHECK(res.events.back().ess == 1.0);
}

TEST_CASE("fk_sample checks the potential dimension") {
  ZeroField field(2);
  CHECK_THROWS_AS(fk_sample(field, ScoreSource::analytic(), NoiseSchedule::none(), make_distance_potential(3, 1.0),
                            SteeringConfig{}, standard_normal_sampler(), Rng(1)),
                  DomainError);
}

TEST_CASE("lambda = 0 steering is indistinguishable from unsteered sampling") {
  // Particles of one ensemble share ancestors, so the test keeps a single
  // particle from each of n independent ensembles: an iid sample of the
  // steered marginal.
  VelocityModel model(ModelSpec{.dim = 2, .hidden = {16, 16}}, 8);
  const auto noise = NoiseSchedule::linear(0.5);
  SteeringConfig cfg{.lambda = 0.0, .particles = 32, .steps = 20, .resample_every = 5};
  const std::size_t n = 1024;
  auto all = steer_batches(model, ScoreSource::analytic(), noise, make_distance_potential(2, 4.0), cfg,
                           standard_normal_sampler(), n * cfg.particles, Rng(1));
  std::vector<std::size_t> firsts(n);
  for (std::size_t i = 0; i < n; ++i) firsts[i] = i * cfg.particles;
  auto steered = all.gather(firsts);
  auto plain = sample_unsteered(model, ScoreSource::analytic(), noise, standard_normal_sampler(), n, 20, Rng(2));

  Rng drng(3);
  const auto dirs = random_directions(2, 128, drng);
  const double observed = sliced_w2(steered, plain, dirs);
  PointSet pooled(2 * n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(steered.row(i).begin(), steered.row(i).end(), pooled.row(i).begin());
    std::copy(plain.row(i).begin(), plain.row(i).end(), pooled.row(n + i).begin());
  }
  std::vector<std::size_t> perm(2 * n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng prng(4);
  std::size_t exceed = 0;
  const std::size_t reps = 200;
  for (std::size_t r = 0; r < reps; ++r) {
    std::shuffle(perm.begin(), perm.end(), prng.engine());
    auto a = pooled.gather(std::span<const std::size_t>(perm).first(n));
    auto b = pooled.gather(std::span<const std::size_t>(perm).subspan(n));
    if (sliced_w2(a, b, dirs) >= observed) ++exceed;
  }
  const double p = (exceed + 1.0) / (reps + 1.0);
  MESSAGE("permutation p = " << p);
  CHECK(p > 0.01);
}

TEST_CASE("importance sampling") {
  ZeroField field(2);
  SUBCASE("lambda = 0 resamples the proposals uniformly") {
    auto res = importance_sample(field, ScoreSource::analytic(), NoiseSchedule::none(), make_distance_potential(2, 1.0),
                                 0.0, 50, 5, standard_normal_sampler(), Rng(2));
    CHECK(res.ess == doctest::Approx(50.0));
    for (std::size_t i = 0; i < 50; ++i) {
      bool found = false;
      for (std::size_t j = 0; j < 50 && !found; ++j) found = std::equal(res.samples.row(i).begin(), res.samples.row(i).end(), res.proposals.row(j).begin());
      CHECK(found);
    }
  }
  SUBCASE("point-mass proposal") {
    PointSampler point = [](Rng&, std::span<double> out) { out[0] = 0.5, out[1] = -2.0; };
    auto res = importance_sample(field, ScoreSource::analytic(), NoiseSchedule::none(), make_distance_potential(2, 9.0),
                                 3.0, 10, 3, point, Rng(2));
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(res.samples.at(i, 0) == 0.5);
      CHECK(res.samples.at(i, 1) == -2.0);
    }
  }
  SUBCASE("hypercube d = 2 with 32 particles finds the positive corner") {
    // Exact corner draws as proposals; P(no proposal in the positive corner) = (3/4)^32.
    std::size_t hits = 0;
    const std::size_t runs = 50;
    for (std::size_t r = 0; r < runs; ++r) {
      auto res = importance_sample(field, ScoreSource::analytic(), NoiseSchedule::none(),
                                   make_indicator_potential(2, 14.0), 1.0, 32, 1, hypercube_corner_sampler(0.2),
                                   Rng(r));
      hits += success_rate(res.samples) > 0.99 ? 1 : 0;
    }
    CHECK(hits >= runs - 1);
  }
}

TEST_CASE("diagnostics CSV") {
  const auto path = (std::filesystem::temp_directory_path() / "flowsteer_diag_test.csv").string();
  std::vector<EventDiagnostics> ev{{2, 0.3, 15.5, 9, 0.0, 0.25, 1.0}};
  write_diagnostics_csv(path, ev);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "step,t,ess,distinct_ancestors,reward_min,reward_median,reward_max");
  CHECK(row == "2,0.29999999999999999,15.5,9,0,0.25,1");
  std::filesystem::remove(path);
}

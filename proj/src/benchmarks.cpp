#include "flowsteer/benchmarks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <initializer_list>
#include <set>
#include <string>

#include "flowsteer/chirality.hpp"
#include "flowsteer/error.hpp"
#include "flowsteer/metrics.hpp"
#include "flowsteer/ode.hpp"
#include "flowsteer/potentials.hpp"

namespace flowsteer {

std::string_view to_string(Profile p) { return p == Profile::smoke ? "smoke" : "paper"; }

Profile parse_profile(std::string_view name) {
  if (name == "smoke") return Profile::smoke;
  if (name == "paper") return Profile::paper;
  throw ConfigError("unknown profile '" + std::string(name) + "' (expected smoke or paper)");
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return Rng(seed, keys).next_u64();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double mean_ess_fraction(std::span<const EventDiagnostics> events, std::size_t particles) {
  if (events.empty()) return 1.0;
  double acc = 0.0;
  for (const auto& e : events) acc += e.ess;
  return acc / (static_cast<double>(events.size()) * static_cast<double>(particles));
}

nlohmann::json model_json(const ModelSpec& m) {
  return {{"hidden", m.hidden}, {"activation", to_string(m.activation)}, {"score_head", m.score_head}};
}

nlohmann::json train_json(const TrainConfig& t) {
  return {{"batch_size", t.batch_size},
          {"steps", t.steps},
          {"learning_rate", t.learning_rate},
          {"final_lr_fraction", t.final_lr_fraction},
          {"bridge_sigma", t.bridge_sigma},
          {"coupling", to_string(t.coupling)},
          {"score_weighting", to_string(t.score_weighting)}};
}

nlohmann::json noise_json(const NoiseSchedule& n) {
  return {{"kind", to_string(n.kind)}, {"sigma0", n.sigma0}, {"sigma1", n.sigma1}};
}

nlohmann::json steering_json(const SteeringConfig& s) {
  return {{"lambda", s.lambda},
          {"schedule", to_string(s.schedule)},
          {"particles", s.particles},
          {"steps", s.steps},
          {"resample_every", s.resample_every},
          {"estimate", to_string(s.estimate)},
          {"deterministic", s.deterministic},
          {"resampling", to_string(s.resampling)}};
}

}  // namespace

// --- shared ------------------------------------------------------------------

PointSet sample_unsteered(const VelocityField& field, const ScoreSource& score, const NoiseSchedule& noise,
                          const PointSampler& prior, std::size_t n, std::size_t steps, const Rng& rng) {
  Rng prior_rng = rng.split({0});
  const PointSet x0 = draw_points(prior, n, field.dim(), prior_rng);
  if (noise.is_zero()) return integrate_ode_final(field, x0, steps);
  return integrate_sde(field, score, noise, x0, steps, rng.split({1}));
}

MarginalCheck marginal_preservation(const VelocityField& field, const ScoreSource& score,
                                    const NoiseSchedule& noise, const PointSampler& prior, std::size_t samples,
                                    std::size_t steps, std::size_t projections, const Rng& rng) {
  const auto none = NoiseSchedule::none();
  // The SDE batch starts from the same prior draws as the first ODE batch; the
  // second ODE batch is independent and sets the sampling-noise floor.
  const PointSet sde = sample_unsteered(field, score, noise, prior, samples, steps, rng.split({0}));
  const PointSet ode_a = sample_unsteered(field, score, none, prior, samples, steps, rng.split({0}));
  const PointSet ode_b = sample_unsteered(field, score, none, prior, samples, steps, rng.split({1}));
  Rng dir_rng = rng.split({3});
  const PointSet dirs = random_directions(field.dim(), projections, dir_rng);
  return {sliced_w2(sde, ode_a, dirs), sliced_w2(ode_b, ode_a, dirs)};
}

PointSet steer_batches(const VelocityField& field, const ScoreSource& score, const NoiseSchedule& noise,
                       const Potential& potential, const SteeringConfig& config, const PointSampler& prior,
                       std::size_t total, const Rng& rng, std::vector<EventDiagnostics>* events) {
  if (total == 0) throw DomainError("steer_batches: total must be >= 1");
  PointSet out(total, field.dim());
  std::size_t filled = 0;
  for (std::uint64_t group = 0; filled < total; ++group) {
    const auto result = fk_sample(field, score, noise, potential, config, prior, rng.split({group}));
    const std::size_t take = std::min(result.samples.size(), total - filled);
    for (std::size_t i = 0; i < take; ++i) {
      auto src = result.samples.row(i);
      std::copy(src.begin(), src.end(), out.row(filled + i).begin());
    }
    filled += take;
    if (events) events->insert(events->end(), result.events.begin(), result.events.end());
  }
  return out;
}

PointSet tilted_reference(const PointSampler& target, const Potential& potential, double lambda, std::size_t n,
                          Rng& rng) {
  PointSet out(n, potential.dim);
  std::vector<double> x(potential.dim);
  std::size_t filled = 0, tries = 0;
  const std::size_t max_tries = 10000 * n + 1000000;
  while (filled < n) {
    if (++tries > max_tries) throw NumericError("tilted_reference: acceptance rate too low");
    target(rng, x);
    const double u = potential(x);
    if (u < 0.0) throw DomainError("tilted_reference: potential must be nonnegative");
    if (rng.uniform() < std::exp(-lambda * u)) {
      std::copy(x.begin(), x.end(), out.row(filled).begin());
      ++filled;
    }
  }
  return out;
}

// --- two-Gaussian ------------------------------------------------------------

TwoGaussianConfig TwoGaussianConfig::for_profile(Profile p) {
  TwoGaussianConfig c;
  if (p == Profile::paper) c.train.steps = 10000;
  return c;
}

nlohmann::json TwoGaussianConfig::to_json() const {
  return {{"seed", seed},
          {"mode_center", mode_center},
          {"mode_std", mode_std},
          {"model", model_json(model)},
          {"train", train_json(train)},
          {"potential_weight", potential_weight},
          {"steering", steering_json(steering)},
          {"noise", noise_json(noise)},
          {"marginal_samples", marginal_samples},
          {"marginal_steps", marginal_steps},
          {"projections", projections}};
}

TwoGaussianResult run_two_gaussian(const TwoGaussianConfig& config) {
  ModelSpec spec = config.model;
  spec.dim = 1;
  TrainConfig train = config.train;
  train.seed = derive_seed(config.seed, {1});
  auto trained = train_flow(two_gaussian_pair_sampler(config.mode_center, config.mode_std), spec, train);

  TwoGaussianResult out{.report = BenchmarkReport("two_gaussian", config.to_json()), .model = std::move(trained.model)};
  const auto& model = out.model;
  const auto prior = standard_normal_sampler();
  const auto score = ScoreSource::analytic();
  const auto potential = make_distance_potential(1, config.potential_weight);
  out.particles = config.steering.particles;

  auto selected = [](const PointSet& s) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < s.size(); ++i) hits += s.at(i, 0) > 0.0 ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(s.size());
  };

  for (bool deterministic : {false, true}) {
    SteeringConfig sc = config.steering;
    sc.deterministic = deterministic;
    const std::uint64_t run_seed = derive_seed(config.seed, {2, deterministic ? 1u : 0u});
    Stopwatch clock;
    const auto r = fk_sample(model, score, config.noise, potential, sc, prior, Rng(run_seed));
    ReportRun row{"two_gaussian", "FK", deterministic ? "deterministic" : "stochastic", 0, run_seed, {}, 0.0};
    row.metrics["selected_fraction"] = selected(r.samples);
    row.metrics["distinct_ancestors"] = static_cast<double>(r.distinct_ancestors());
    row.metrics["distinct_samples"] = static_cast<double>(r.distinct_samples());
    row.metrics["ess_mean"] = mean_ess_fraction(r.events, sc.particles);
    row.runtime_seconds = clock.seconds();
    if (deterministic) {
      out.deterministic_selected_fraction = row.metrics["selected_fraction"];
      out.deterministic_distinct_ancestors = r.distinct_ancestors();
      out.deterministic_distinct_samples = r.distinct_samples();
      for (const auto& e : r.events) out.deterministic_ancestor_trace.push_back(e.distinct_ancestors);
    } else {
      out.stochastic_selected_fraction = row.metrics["selected_fraction"];
      out.stochastic_distinct_samples = r.distinct_samples();
    }
    out.report.add(std::move(row));
  }

  const std::uint64_t marginal_seed = derive_seed(config.seed, {3});
  Stopwatch clock;
  out.marginal = marginal_preservation(model, score, config.noise, prior, config.marginal_samples,
                                       config.marginal_steps, config.projections, Rng(marginal_seed));
  out.report.add({"two_gaussian",
                  "SDE",
                  "marginal",
                  0,
                  marginal_seed,
                  {{"sde_vs_ode", out.marginal.sde_vs_ode}, {"ode_vs_ode", out.marginal.ode_vs_ode}},
                  clock.seconds()});
  return out;
}

// --- hypercube ---------------------------------------------------------------

// The smoke profile keeps the full 1000 steps per dimension: with fewer the
// d=2 score head is too rough for the marginal and score checks.
HypercubeConfig HypercubeConfig::for_profile(Profile) { return {}; }

nlohmann::json HypercubeConfig::to_json() const {
  return {{"seed", seed},
          {"dims", dims},
          {"corner_std", corner_std},
          {"model", model_json(model)},
          {"train", train_json(train)},
          {"steps_per_dim", steps_per_dim},
          {"noise", noise_json(noise)},
          {"marginal_noise", noise_json(marginal_noise)},
          {"particles", particles},
          {"steps", steps},
          {"resample_every", resample_every},
          {"repeats", repeats},
          {"schedule", to_string(schedule)},
          {"estimate", to_string(estimate)},
          {"distance_lambda", distance_lambda},
          {"distance_weight", distance_weight},
          {"indicator_lambda", indicator_lambda},
          {"indicator_weight", indicator_weight},
          {"indicator_particles", indicator_particles},
          {"indicator_dims", indicator_dims},
          {"reference_samples", reference_samples},
          {"projections", projections},
          {"check_marginals", check_marginals},
          {"marginal_samples", marginal_samples},
          {"marginal_steps", marginal_steps}};
}

HypercubeResult run_hypercube_benchmark(const HypercubeConfig& config) {
  if (config.dims.empty()) throw ConfigError("hypercube: no dimensions given");
  HypercubeResult out{BenchmarkReport("hypercube", config.to_json()), {}};
  const auto score = ScoreSource::learned();
  const auto prior = uniform_box_sampler(-1.0, 1.0);

  for (std::size_t d : config.dims) {
    if (d == 0) throw ConfigError("hypercube: dimension must be >= 1");
    ModelSpec spec = config.model;
    spec.dim = d;
    spec.score_head = true;
    TrainConfig train = config.train;
    train.steps = config.steps_per_dim * d;
    train.seed = derive_seed(config.seed, {10, d});
    auto trained = train_flow(gen_hypercube_pair_sampler(d, config.corner_std), spec, train);
    HypercubeModel entry{d, std::move(trained.model), {}};
    const auto& model = entry.model;
    const std::string group = "d=" + std::to_string(d);

    // Target of the tilted problem: the positive-orthant corner Gaussian.
    Rng ref_rng(config.seed, {11, d});
    PointSet reference(config.reference_samples, d);
    for (std::size_t i = 0; i < reference.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) reference.at(i, j) = 2.0 + config.corner_std * ref_rng.normal();
    Rng dir_rng(config.seed, {12, d});
    const SlicedReference target(reference, random_directions(d, config.projections, dir_rng));

    struct Variant {
      std::string name;
      Potential potential;
      double lambda;
      std::size_t particles;
    };
    std::vector<Variant> variants{{"distance,S=" + std::to_string(config.particles),
                                   make_distance_potential(d, config.distance_weight), config.distance_lambda,
                                   config.particles}};
    if (std::find(config.indicator_dims.begin(), config.indicator_dims.end(), d) != config.indicator_dims.end())
      for (std::size_t s : config.indicator_particles)
        variants.push_back({"indicator,S=" + std::to_string(s), make_indicator_potential(d, config.indicator_weight),
                            config.indicator_lambda, s});

    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
      const auto& v = variants[vi];
      SteeringConfig sc{.lambda = v.lambda,
                        .schedule = config.schedule,
                        .particles = v.particles,
                        .steps = config.steps,
                        .resample_every = config.resample_every,
                        .estimate = config.estimate};
      for (std::size_t r = 0; r < config.repeats; ++r) {
        const std::uint64_t fk_seed = derive_seed(config.seed, {13, d, vi, r});
        Stopwatch fk_clock;
        const auto fk = fk_sample(model, score, config.noise, v.potential, sc, prior, Rng(fk_seed));
        out.report.add({group,
                        "FK",
                        v.name,
                        r,
                        fk_seed,
                        {{"success_rate", success_rate(fk.samples)},
                         {"sliced_w2", target.distance(fk.samples)},
                         {"ess_mean", mean_ess_fraction(fk.events, v.particles)}},
                        fk_clock.seconds()});

        const std::uint64_t is_seed = derive_seed(config.seed, {14, d, vi, r});
        Stopwatch is_clock;
        const auto is = importance_sample(model, score, config.noise, v.potential, v.lambda, v.particles,
                                          config.steps, prior, Rng(is_seed));
        out.report.add({group,
                        "IS",
                        v.name,
                        r,
                        is_seed,
                        {{"success_rate", success_rate(is.samples)},
                         {"sliced_w2", target.distance(is.samples)},
                         {"ess_mean", is.ess / static_cast<double>(v.particles)}},
                        is_clock.seconds()});
      }
    }

    if (config.check_marginals) {
      const std::uint64_t marginal_seed = derive_seed(config.seed, {15, d});
      Stopwatch clock;
      entry.marginal = marginal_preservation(model, score, config.marginal_noise, prior, config.marginal_samples,
                                             config.marginal_steps, config.projections, Rng(marginal_seed));
      entry.steering_marginal = marginal_preservation(model, score, config.noise, prior, config.marginal_samples,
                                                      config.marginal_steps, config.projections, Rng(marginal_seed));
      out.report.add({group,
                      "SDE",
                      "marginal",
                      0,
                      marginal_seed,
                      {{"sde_vs_ode", entry.marginal.sde_vs_ode},
                       {"ode_vs_ode", entry.marginal.ode_vs_ode},
                       {"steering_noise_sde_vs_ode", entry.steering_marginal.sde_vs_ode},
                       {"steering_noise_ode_vs_ode", entry.steering_marginal.ode_vs_ode}},
                      clock.seconds()});
    }
    out.models.push_back(std::move(entry));
  }
  return out;
}

// --- 2D ----------------------------------------------------------------------

std::string pair_name(const DatasetPair& p) {
  return std::string(to_string(p.source)) + "->" + std::string(to_string(p.target));
}

std::string_view to_string(CouplingKind k) { return k == CouplingKind::cfm ? "cfm" : "ot"; }

TwoDConfig TwoDConfig::for_profile(Profile p) {
  TwoDConfig c;
  if (p == Profile::paper) c.train.steps = 20000;
  return c;
}

nlohmann::json TwoDConfig::to_json() const {
  nlohmann::json pairs_json = nlohmann::json::array();
  for (const auto& p : pairs) pairs_json.push_back(pair_name(p));
  nlohmann::json kinds_json = nlohmann::json::array();
  for (auto k : kinds) kinds_json.push_back(to_string(k));
  return {{"seed", seed},
          {"pairs", pairs_json},
          {"kinds", kinds_json},
          {"model", model_json(model)},
          {"train", train_json(train)},
          {"tilt_weight", tilt_weight},
          {"tilt_axis", tilt_axis},
          {"steering", steering_json(steering)},
          {"repeats", repeats},
          {"batch_samples", batch_samples},
          {"reference_samples", reference_samples},
          {"projections", projections}};
}

BenchmarkReport run_2d_benchmark(const TwoDConfig& config) {
  BenchmarkReport report("twod", config.to_json());
  const auto none = NoiseSchedule::none();
  const auto score = ScoreSource::analytic();
  const auto tilt = make_halfspace_potential(2, config.tilt_weight, config.tilt_axis);

  for (std::size_t pi = 0; pi < config.pairs.size(); ++pi) {
    const auto& pair = config.pairs[pi];
    const std::string group = pair_name(pair);
    const auto prior = dataset_2d_sampler(pair.source);
    const auto target = dataset_2d_sampler(pair.target);
    Rng ref_rng(config.seed, {20, pi});
    const PointSet tilted = tilted_reference(target, tilt, config.steering.lambda, config.reference_samples, ref_rng);
    const PointSet untilted = gen_2d_dataset(pair.target, config.reference_samples, ref_rng);
    Rng dir_rng(config.seed, {21, pi});
    const PointSet dirs = random_directions(2, config.projections, dir_rng);
    const SlicedReference tilted_ref(tilted, dirs), untilted_ref(untilted, dirs);

    for (auto kind : config.kinds) {
      const std::string variant(to_string(kind));
      ModelSpec spec = config.model;
      spec.dim = 2;
      spec.score_head = false;
      TrainConfig train = config.train;
      train.coupling = kind == CouplingKind::ot ? Coupling::minibatch_ot : Coupling::independent;
      train.bridge_sigma = 0.0;
      train.seed = derive_seed(config.seed, {22, pi, static_cast<std::uint64_t>(kind)});
      const auto trained = train_flow(independent_pair_sampler(2, prior, target), spec, train);
      const auto& model = trained.model;

      SteeringConfig fk = config.steering;
      fk.deterministic = true;
      SteeringConfig fk0 = fk;
      fk0.lambda = 0.0;
      for (std::size_t r = 0; r < config.repeats; ++r) {
        const std::uint64_t k = static_cast<std::uint64_t>(kind);
        const std::uint64_t fk_seed = derive_seed(config.seed, {23, pi, k, r});
        Stopwatch c1;
        const auto steered = steer_batches(model, score, none, tilt, fk, prior, config.batch_samples, Rng(fk_seed));
        report.add({group, "FK", variant, r, fk_seed, {{"sliced_w2", tilted_ref.distance(steered)}}, c1.seconds()});

        const std::uint64_t un_seed = derive_seed(config.seed, {24, pi, k, r});
        Stopwatch c2;
        const auto plain = sample_unsteered(model, score, none, prior, config.batch_samples, fk.steps, Rng(un_seed));
        report.add({group,
                    "unsteered",
                    variant,
                    r,
                    un_seed,
                    {{"sliced_w2", tilted_ref.distance(plain)}, {"sliced_w2_untilted", untilted_ref.distance(plain)}},
                    c2.seconds()});

        const std::uint64_t z_seed = derive_seed(config.seed, {25, pi, k, r});
        Stopwatch c3;
        const auto neutral = steer_batches(model, score, none, tilt, fk0, prior, config.batch_samples, Rng(z_seed));
        report.add({group, "FK_lambda0", variant, r, z_seed, {{"sliced_w2_untilted", untilted_ref.distance(neutral)}},
                    c3.seconds()});
      }
    }
  }
  return report;
}

// --- chirality ---------------------------------------------------------------

ChiralConfig ChiralConfig::for_profile(Profile p) {
  ChiralConfig c;
  if (p == Profile::paper) c.train.steps = 20000;
  return c;
}

nlohmann::json ChiralConfig::to_json() const {
  return {{"seed", seed},
          {"model", model_json(model)},
          {"train", train_json(train)},
          {"noise", noise_json(noise)},
          {"lambda", lambda},
          {"tune_weight", tune_weight},
          {"tune_samples", tune_samples},
          {"steering", steering_json(steering)},
          {"repeats", repeats},
          {"batch_samples", batch_samples},
          {"check_marginals", check_marginals},
          {"marginal_samples", marginal_samples},
          {"marginal_steps", marginal_steps},
          {"projections", projections}};
}

double correct_sign_fraction(const PointSet& geometries) {
  if (geometries.empty()) throw DomainError("correct_sign_fraction: empty batch");
  const ChiralCenter center = chiral_toy_center();
  std::size_t ok = 0;
  for (std::size_t i = 0; i < geometries.size(); ++i)
    if (!consistent_chirality_error(geometries.row(i), std::span(&center, 1))) ++ok;
  return static_cast<double>(ok) / static_cast<double>(geometries.size());
}

namespace {

double thresholded_error_rate(const PointSet& geometries) {
  const ChiralCenter center = chiral_toy_center();
  std::size_t bad = 0;
  for (std::size_t i = 0; i < geometries.size(); ++i) {
    try {
      if (thresholded_chirality_error(geometries.row(i), std::span(&center, 1))) ++bad;
    } catch (const DegenerateGeometryError&) {
      // A collapsed edge has no meaningful normalised volume; not counted.
    }
  }
  return static_cast<double>(bad) / static_cast<double>(geometries.size());
}

}  // namespace

ChiralResult run_chiral_benchmark(const ChiralConfig& config) {
  ModelSpec spec = config.model;
  spec.dim = kChiralToyDim;
  TrainConfig train = config.train;
  train.seed = derive_seed(config.seed, {30});
  auto trained = train_flow(gen_chiral_toy_sampler(), spec, train);

  ChiralResult out{.report = BenchmarkReport("chiral", {}), .model = std::move(trained.model)};
  const auto& model = out.model;
  const auto prior = standard_normal_sampler();
  const auto score = ScoreSource::analytic();
  const auto potential = make_chirality_potential(kChiralToyAtoms, {chiral_toy_center()});

  out.lambda = config.lambda;
  if (!(out.lambda > 0.0)) {
    const PointSet probe = sample_unsteered(model, score, config.noise, prior, config.tune_samples,
                                            config.steering.steps, Rng(derive_seed(config.seed, {31})));
    std::vector<double> positive;
    for (std::size_t i = 0; i < probe.size(); ++i)
      if (const double u = potential(probe.row(i)); u > 0.0) positive.push_back(u);
    if (positive.empty()) throw NumericError("chiral: no unsteered sample has positive potential; cannot tune lambda");
    out.lambda = -std::log(config.tune_weight) / quantile(positive, 0.5);
  }
  nlohmann::json echo = config.to_json();
  echo["lambda_used"] = out.lambda;
  out.report = BenchmarkReport("chiral", echo);

  SteeringConfig fk = config.steering;
  fk.lambda = out.lambda;
  SteeringConfig fk0 = config.steering;
  fk0.lambda = 0.0;
  double sum_un = 0.0, sum_fk = 0.0, sum_0 = 0.0;
  for (std::size_t r = 0; r < config.repeats; ++r) {
    const std::uint64_t un_seed = derive_seed(config.seed, {32, r});
    Stopwatch c1;
    const auto plain = sample_unsteered(model, score, config.noise, prior, config.batch_samples, fk.steps, Rng(un_seed));
    const double f_un = correct_sign_fraction(plain);
    out.report.add({"chiral", "unsteered", "", r, un_seed,
                    {{"correct_fraction", f_un}, {"thresholded_error_rate", thresholded_error_rate(plain)}},
                    c1.seconds()});

    const std::uint64_t fk_seed = derive_seed(config.seed, {33, r});
    Stopwatch c2;
    const auto steered = steer_batches(model, score, config.noise, potential, fk, prior, config.batch_samples, Rng(fk_seed));
    const double f_fk = correct_sign_fraction(steered);
    out.report.add({"chiral", "FK", "", r, fk_seed,
                    {{"correct_fraction", f_fk}, {"thresholded_error_rate", thresholded_error_rate(steered)}},
                    c2.seconds()});

    const std::uint64_t z_seed = derive_seed(config.seed, {34, r});
    Stopwatch c3;
    const auto neutral = steer_batches(model, score, config.noise, potential, fk0, prior, config.batch_samples, Rng(z_seed));
    const double f_0 = correct_sign_fraction(neutral);
    out.report.add({"chiral", "FK_lambda0", "", r, z_seed,
                    {{"correct_fraction", f_0}, {"thresholded_error_rate", thresholded_error_rate(neutral)}},
                    c3.seconds()});
    sum_un += f_un;
    sum_fk += f_fk;
    sum_0 += f_0;
  }
  const double reps = static_cast<double>(std::max<std::size_t>(config.repeats, 1));
  out.unsteered_fraction = sum_un / reps;
  out.steered_fraction = sum_fk / reps;
  out.lambda0_fraction = sum_0 / reps;

  if (config.check_marginals) {
    const std::uint64_t marginal_seed = derive_seed(config.seed, {35});
    Stopwatch clock;
    out.marginal = marginal_preservation(model, score, config.noise, prior, config.marginal_samples,
                                         config.marginal_steps, config.projections, Rng(marginal_seed));
    out.report.add({"chiral", "SDE", "marginal", 0, marginal_seed,
                    {{"sde_vs_ode", out.marginal.sde_vs_ode}, {"ode_vs_ode", out.marginal.ode_vs_ode}}, clock.seconds()});
  }
  return out;
}

}  // namespace flowsteer

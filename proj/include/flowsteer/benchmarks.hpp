#pragma once

// Experiment drivers: the 1D two-Gaussian mode-isolation study, the hypercube
// scaling suite, the 2D dataset suite and the toy chirality suite. Every
// driver trains its models inline from the seed in its config.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowsteer/datasets.hpp"
#include "flowsteer/point_set.hpp"
#include "flowsteer/report.hpp"
#include "flowsteer/sampler.hpp"
#include "flowsteer/score_sde.hpp"
#include "flowsteer/steering.hpp"
#include "flowsteer/training.hpp"
#include "flowsteer/velocity_model.hpp"

namespace flowsteer {

enum class Profile { smoke, paper };

std::string_view to_string(Profile p);
Profile parse_profile(std::string_view name);

// --- shared pieces -----------------------------------------------------------

/// Sliced-W2 between an SDE batch and an ODE batch started from the same prior
/// draws, and between that ODE batch and an independent one.
struct MarginalCheck {
  double sde_vs_ode = 0.0;
  double ode_vs_ode = 0.0;

  double ratio() const { return sde_vs_ode / ode_vs_ode; }
};

MarginalCheck marginal_preservation(const VelocityField& field, const ScoreSource& score,
                                    const NoiseSchedule& noise, const PointSampler& prior, std::size_t samples,
                                    std::size_t steps, std::size_t projections, const Rng& rng);

/// `total` samples from independent FK ensembles of config.particles each.
/// Diagnostics of every ensemble are appended to `events` when given.
PointSet steer_batches(const VelocityField& field, const ScoreSource& score, const NoiseSchedule& noise,
                       const Potential& potential, const SteeringConfig& config, const PointSampler& prior,
                       std::size_t total, const Rng& rng, std::vector<EventDiagnostics>* events = nullptr);

/// Plain ODE/SDE samples.
PointSet sample_unsteered(const VelocityField& field, const ScoreSource& score, const NoiseSchedule& noise,
                          const PointSampler& prior, std::size_t n, std::size_t steps, const Rng& rng);

/// Rejection sampling from p(x) exp(-lambda U(x)), U >= 0.
PointSet tilted_reference(const PointSampler& target, const Potential& potential, double lambda, std::size_t n,
                          Rng& rng);

// --- two-Gaussian ------------------------------------------------------------

struct TwoGaussianConfig {
  std::uint64_t seed = 1;
  double mode_center = 2.0;
  double mode_std = 0.3;
  ModelSpec model{.dim = 1, .hidden = {64, 64, 64}};
  TrainConfig train{.batch_size = 256, .steps = 3000, .learning_rate = 2e-3, .final_lr_fraction = 0.1};
  /// Half-line potential w max(0, -x) selecting the positive mode.
  double potential_weight = 4.0;
  SteeringConfig steering{.lambda = 1.0, .particles = 512, .steps = 100, .resample_every = 5};
  NoiseSchedule noise = NoiseSchedule::linear(0.3);
  std::size_t marginal_samples = 4096;
  std::size_t marginal_steps = 100;
  std::size_t projections = 4096;

  static TwoGaussianConfig for_profile(Profile p);
  nlohmann::json to_json() const;
};

struct TwoGaussianResult {
  BenchmarkReport report;
  VelocityModel model;
  std::size_t particles = 0;
  double stochastic_selected_fraction = 0.0;
  double deterministic_selected_fraction = 0.0;
  std::size_t stochastic_distinct_samples = 0;
  std::size_t deterministic_distinct_ancestors = 0;
  std::size_t deterministic_distinct_samples = 0;
  /// Distinct ancestors after each event of the deterministic run.
  std::vector<std::size_t> deterministic_ancestor_trace{};
  MarginalCheck marginal{};
};

TwoGaussianResult run_two_gaussian(const TwoGaussianConfig& config);

// --- hypercube ---------------------------------------------------------------

struct HypercubeConfig {
  std::uint64_t seed = 1;
  std::vector<std::size_t> dims{2, 4, 6, 8};
  double corner_std = 0.2;
  ModelSpec model{.hidden = {128, 128, 128, 128}, .score_head = true};
  TrainConfig train{.batch_size = 512, .learning_rate = 1e-3, .final_lr_fraction = 0.1, .bridge_sigma = 2.0};
  /// Training steps are steps_per_dim * d.
  std::size_t steps_per_dim = 1000;
  /// Stronger than the library default: the bridge-trained hypercube models
  /// need the extra diffusion to repopulate pruned corners.
  NoiseSchedule noise = NoiseSchedule::linear(1.0);
  /// Noise for the marginal check. The learned score error enters the drift
  /// scaled by sigma^2 / 2, so the strong steering noise biases the SDE marginal.
  NoiseSchedule marginal_noise = NoiseSchedule::linear(0.3);
  std::size_t particles = 32;
  std::size_t steps = 50;
  std::size_t resample_every = 3;
  std::size_t repeats = 10;
  PotentialSchedule schedule = PotentialSchedule::harmonic_sum;
  EstimateOrder estimate = EstimateOrder::one_shot;
  double distance_lambda = 1.0;
  double distance_weight = 15.0;
  double indicator_lambda = 1.0;
  double indicator_weight = 14.0;  // exp(-lambda w) <= 1e-6
  /// Indicator-potential particle sweep, run at the dimensions in indicator_dims.
  std::vector<std::size_t> indicator_particles{16, 128};
  std::vector<std::size_t> indicator_dims{6};
  std::size_t reference_samples = 2048;
  std::size_t projections = 4096;
  bool check_marginals = true;
  std::size_t marginal_samples = 4096;
  std::size_t marginal_steps = 50;

  static HypercubeConfig for_profile(Profile p);
  nlohmann::json to_json() const;
};

struct HypercubeModel {
  std::size_t dim = 0;
  VelocityModel model;
  MarginalCheck marginal{};           // at marginal_noise
  MarginalCheck steering_marginal{};  // at the steering noise, informational
};

struct HypercubeResult {
  BenchmarkReport report;
  std::vector<HypercubeModel> models;
};

/// Rows: group "d=<d>", method FK or IS, variant "<potential>,S=<S>";
/// metrics success_rate, sliced_w2, ess_mean.
HypercubeResult run_hypercube_benchmark(const HypercubeConfig& config);

// --- 2D ----------------------------------------------------------------------

struct DatasetPair {
  Dataset2D source;
  Dataset2D target;
};

enum class CouplingKind { cfm, ot };

struct TwoDConfig {
  std::uint64_t seed = 1;
  std::vector<DatasetPair> pairs{{Dataset2D::circle, Dataset2D::s_curve},
                                 {Dataset2D::uniform_square, Dataset2D::eight_gaussians},
                                 {Dataset2D::eight_gaussians, Dataset2D::moons}};
  std::vector<CouplingKind> kinds{CouplingKind::cfm, CouplingKind::ot};
  ModelSpec model{.dim = 2, .hidden = {128, 128, 128}};
  TrainConfig train{.batch_size = 256, .steps = 4000, .learning_rate = 2e-3, .final_lr_fraction = 0.1};
  /// Tilt: w max(0, -x[axis]), the distance to the upper half-plane.
  double tilt_weight = 4.0;
  std::size_t tilt_axis = 1;
  SteeringConfig steering{.lambda = 1.0, .particles = 1024, .steps = 40, .resample_every = 10,
                          .deterministic = true};
  std::size_t repeats = 10;
  std::size_t batch_samples = 1024;
  std::size_t reference_samples = 4096;
  std::size_t projections = 4096;

  static TwoDConfig for_profile(Profile p);
  nlohmann::json to_json() const;
};

std::string pair_name(const DatasetPair& p);
std::string_view to_string(CouplingKind k);

/// Rows: group "<source>-><target>", method FK, unsteered or FK_lambda0,
/// variant cfm or ot; metric sliced_w2 (to the tilted reference; FK_lambda0
/// is measured against the untilted target).
BenchmarkReport run_2d_benchmark(const TwoDConfig& config);

// --- chirality ---------------------------------------------------------------

struct ChiralConfig {
  std::uint64_t seed = 1;
  ModelSpec model{.dim = kChiralToyDim, .hidden = {256, 256, 256}};
  TrainConfig train{.batch_size = 256, .steps = 8000, .learning_rate = 1e-3, .final_lr_fraction = 0.1};
  NoiseSchedule noise = NoiseSchedule::linear(0.3);
  /// lambda <= 0 means: tune from unsteered samples so that the median of
  /// exp(-lambda U) over samples with U > 0 equals tune_weight.
  double lambda = 0.0;
  double tune_weight = 1e-4;
  std::size_t tune_samples = 1024;
  SteeringConfig steering{.particles = 64, .steps = 50, .resample_every = 5};
  std::size_t repeats = 10;
  std::size_t batch_samples = 512;
  bool check_marginals = true;
  std::size_t marginal_samples = 4096;
  std::size_t marginal_steps = 100;
  std::size_t projections = 4096;

  static ChiralConfig for_profile(Profile p);
  nlohmann::json to_json() const;
};

struct ChiralResult {
  BenchmarkReport report;
  VelocityModel model;
  double lambda = 0.0;
  double unsteered_fraction = 0.0;  // mean over repeats
  double steered_fraction = 0.0;
  double lambda0_fraction = 0.0;
  MarginalCheck marginal{};
};

/// Fraction of geometries whose toy centre has the declared (R) handedness.
double correct_sign_fraction(const PointSet& geometries);

/// Rows: group "chiral", method unsteered, FK or FK_lambda0; metrics
/// correct_fraction, thresholded_error_rate.
ChiralResult run_chiral_benchmark(const ChiralConfig& config);

}  // namespace flowsteer

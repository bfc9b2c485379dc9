#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "flowsteer/point_set.hpp"
#include "flowsteer/rng.hpp"
#include "flowsteer/velocity_model.hpp"

namespace flowsteer {

enum class Coupling { independent, minibatch_ot };

/// How the score term of the loss is weighted per sample. `bridge_variance`
/// multiplies it by sigma_b^2 t(1-t), which turns the regression into one on
/// the unit-variance bridge noise and keeps near-endpoint samples from
/// dominating the gradient.
enum class ScoreWeighting { uniform, bridge_variance };

std::string_view to_string(Coupling c);
Coupling parse_coupling(std::string_view name);
std::string_view to_string(ScoreWeighting w);
ScoreWeighting parse_score_weighting(std::string_view name);

struct TrainConfig {
  std::size_t batch_size = 256;
  std::size_t steps = 2000;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  /// Learning rate decays to `final_lr_fraction * learning_rate` on a cosine; 1 keeps it constant.
  double final_lr_fraction = 1.0;
  double bridge_sigma = 0.0;
  /// Times are drawn from [eps, 1 - eps] when bridge_sigma > 0, else from [0, 1].
  double time_epsilon = 1e-3;
  Coupling coupling = Coupling::independent;
  ScoreWeighting score_weighting = ScoreWeighting::bridge_variance;
  std::uint64_t seed = 0;

  /// Throws DomainError on an invalid combination.
  void validate() const;
};

/// Source/target pairs for training: fills every row of x0 and x1.
struct PairSampler {
  std::size_t dim = 0;
  std::function<void(Rng&, PointSet& x0, PointSet& x1)> draw;
};

struct TrainResult {
  VelocityModel model;
  std::vector<double> loss_trace;
};

/// Minimises the conditional flow matching loss (plus the bridge score loss
/// when the model has a score head) with Adam. Deterministic in config.seed.
/// A non-finite loss aborts with NumericError naming the step.
TrainResult train_flow(const PairSampler& sampler, const ModelSpec& spec, const TrainConfig& config);

/// Trailing moving average over `window` steps (shorter at the start).
std::vector<double> smoothed_trace(const std::vector<double>& trace, std::size_t window);

}  // namespace flowsteer

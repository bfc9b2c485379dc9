#pragma once

#include <optional>
#include <span>
#include <vector>

#include "flowsteer/rng.hpp"
#include "flowsteer/schedule.hpp"

namespace flowsteer {

/// A point on the conditional path between x0 and x1 with its regression targets.
struct PathSample {
  std::vector<double> x_t;
  std::vector<double> v_target;
  std::optional<std::vector<double>> s_target;  // present iff bridge noise > 0
  double t = 0.0;
};

/// x_t = mu_t + sigma_b sqrt(t(1-t)) eps with mu_t = alpha x1 + beta x0.
/// v_target = alpha' x1 + beta' x0 + (1-2t)/(2t(1-t)) (x_t - mu_t),
/// s_target = -(x_t - mu_t) / (sigma_b^2 t(1-t)).
/// With sigma_b = 0 the path is deterministic and no score target is produced.
/// Throws SingularityError for sigma_b > 0 at t in {0, 1}.
PathSample sample_conditional_path(std::span<const double> x0, std::span<const double> x1, double t,
                                   double bridge_sigma, Rng& rng, ScheduleParams schedule = {});

/// Same, with the standard-normal draw supplied by the caller.
PathSample conditional_path_with_noise(std::span<const double> x0, std::span<const double> x1, double t,
                                       double bridge_sigma, std::span<const double> noise,
                                       ScheduleParams schedule = {});

/// log N(x; mu_t, sigma_b^2 t(1-t) I), the bridge density whose gradient is s_target.
double bridge_log_density(std::span<const double> x, std::span<const double> x0, std::span<const double> x1,
                          double t, double bridge_sigma, ScheduleParams schedule = {});

struct PathPrediction {
  std::vector<double> velocity;
  std::optional<std::vector<double>> score;
};

/// mean_i |v_hat - v_target|^2 + mean_i w_i |s_hat - s_target|^2.
/// The score term is included when predictions carry a score; `score_weights`
/// (one per sample) defaults to 1.
double cfm_regression_loss(std::span<const PathPrediction> predictions, std::span<const PathSample> targets,
                           std::span<const double> score_weights = {});

}  // namespace flowsteer

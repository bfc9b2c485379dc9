#include "flowsteer/conditional_path.hpp"

#include <cmath>
#include <numbers>

#include "flowsteer/error.hpp"

namespace flowsteer {

PathSample conditional_path_with_noise(std::span<const double> x0, std::span<const double> x1, double t,
                                       double bridge_sigma, std::span<const double> noise,
                                       ScheduleParams schedule) {
  const std::size_t d = x0.size();
  if (x1.size() != d) throw DomainError("conditional path: endpoint dimensions differ");
  if (bridge_sigma < 0.0) throw DomainError("conditional path: bridge noise must be nonnegative");
  const auto s = schedule.at(t);
  PathSample out;
  out.t = t;
  out.x_t.resize(d);
  out.v_target.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    out.x_t[i] = s.alpha * x1[i] + s.beta * x0[i];
    out.v_target[i] = s.alpha_dot * x1[i] + s.beta_dot * x0[i];
  }
  if (bridge_sigma == 0.0) return out;

  if (t <= 0.0 || t >= 1.0) throw SingularityError("bridge variance vanishes at t = " + std::to_string(t));
  if (noise.size() != d) throw DomainError("conditional path: noise dimension differs");
  const double var = t * (1.0 - t);
  const double std_dev = bridge_sigma * std::sqrt(var);
  const double drift_gain = (1.0 - 2.0 * t) / (2.0 * var);
  std::vector<double> score(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double offset = std_dev * noise[i];
    out.x_t[i] += offset;
    out.v_target[i] += drift_gain * offset;
    score[i] = -offset / (bridge_sigma * bridge_sigma * var);
  }
  out.s_target = std::move(score);
  return out;
}

PathSample sample_conditional_path(std::span<const double> x0, std::span<const double> x1, double t,
                                   double bridge_sigma, Rng& rng, ScheduleParams schedule) {
  std::vector<double> noise;
  if (bridge_sigma > 0.0) {
    noise.resize(x0.size());
    rng.fill_normal(noise);
  }
  return conditional_path_with_noise(x0, x1, t, bridge_sigma, noise, schedule);
}

double bridge_log_density(std::span<const double> x, std::span<const double> x0, std::span<const double> x1,
                          double t, double bridge_sigma, ScheduleParams schedule) {
  if (bridge_sigma <= 0.0 || t <= 0.0 || t >= 1.0) throw SingularityError("bridge density is singular");
  const auto s = schedule.at(t);
  const double var = bridge_sigma * bridge_sigma * t * (1.0 - t);
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = x[i] - (s.alpha * x1[i] + s.beta * x0[i]);
    sq += r * r;
  }
  return -0.5 * sq / var - 0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi * var);
}

double cfm_regression_loss(std::span<const PathPrediction> predictions, std::span<const PathSample> targets,
                           std::span<const double> score_weights) {
  if (predictions.empty()) throw DomainError("loss: empty batch");
  if (predictions.size() != targets.size()) throw DomainError("loss: prediction and target counts differ");
  if (!score_weights.empty() && score_weights.size() != targets.size())
    throw DomainError("loss: one score weight per sample required");
  double v_sum = 0.0, s_sum = 0.0;
  bool any_score = false;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    const auto& q = targets[i];
    if (p.velocity.size() != q.v_target.size()) throw DomainError("loss: velocity dimension mismatch");
    for (std::size_t j = 0; j < p.velocity.size(); ++j) {
      const double r = p.velocity[j] - q.v_target[j];
      v_sum += r * r;
    }
    if (p.score) {
      if (!q.s_target || q.s_target->size() != p.score->size())
        throw DomainError("loss: score dimension mismatch");
      any_score = true;
      double sq = 0.0;
      for (std::size_t j = 0; j < p.score->size(); ++j) {
        const double r = (*p.score)[j] - (*q.s_target)[j];
        sq += r * r;
      }
      s_sum += (score_weights.empty() ? 1.0 : score_weights[i]) * sq;
    }
  }
  const double n = static_cast<double>(predictions.size());
  return v_sum / n + (any_score ? s_sum / n : 0.0);
}

}  // namespace flowsteer

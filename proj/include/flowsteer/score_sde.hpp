#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "flowsteer/point_set.hpp"
#include "flowsteer/rng.hpp"
#include "flowsteer/schedule.hpp"
#include "flowsteer/velocity_model.hpp"

namespace flowsteer {

/// Score evaluations are restricted to [eps, 1 - eps]; the velocity-to-score
/// conversion is singular at both endpoints for the OT schedule.
inline constexpr double kScoreTimeEpsilon = 1e-3;

enum class NoiseKind { constant, linear_decay };

std::string_view to_string(NoiseKind k);
NoiseKind parse_noise_kind(std::string_view name);

/// Isotropic diffusion coefficient sigma(t) (a standard deviation).
struct NoiseSchedule {
  NoiseKind kind = NoiseKind::linear_decay;
  double sigma0 = 0.3;
  double sigma1 = 0.0;  // value at t = 1, linear_decay only

  double at(double t) const;
  bool is_zero() const;
  void validate() const;

  static NoiseSchedule none() { return {NoiseKind::constant, 0.0, 0.0}; }
  static NoiseSchedule constant(double sigma) { return {NoiseKind::constant, sigma, sigma}; }
  static NoiseSchedule linear(double sigma0, double sigma1 = 0.0) { return {NoiseKind::linear_decay, sigma0, sigma1}; }
};

enum class ScoreSourceKind { analytic_gaussian, learned };

/// Where grad log p_t comes from: the closed form for a standard-normal prior,
/// or the model's own score head.
struct ScoreSource {
  ScoreSourceKind kind = ScoreSourceKind::analytic_gaussian;
  ScheduleParams schedule{};

  static ScoreSource analytic(ScheduleParams s = {}) { return {ScoreSourceKind::analytic_gaussian, s}; }
  static ScoreSource learned() { return {ScoreSourceKind::learned, {}}; }
};

std::string_view to_string(ScoreSourceKind k);
ScoreSourceKind parse_score_source(std::string_view name);

/// Score of the marginal path for a N(0, I) prior, from the velocity:
///   (v - (alpha'/alpha) x) / (beta ((alpha'/alpha) beta - beta')).
/// For the OT schedule this is t/(1-t) (v - x/t). Throws SingularityError for
/// t outside [kScoreTimeEpsilon, 1 - kScoreTimeEpsilon].
std::vector<double> gaussian_score_from_velocity(std::span<const double> x, std::span<const double> v, double t,
                                                 ScheduleParams schedule = {});
/// Batched form over flat arrays of equal length.
void gaussian_score_from_velocity(std::span<const double> x, std::span<const double> v, double t,
                                  ScheduleParams schedule, std::span<double> score);

/// v + (sigma_t^2 / 2) score
std::vector<double> corrected_drift(std::span<const double> v, std::span<const double> score, double sigma_t);

/// x + dt w + sqrt(dt) sigma_t xi, xi ~ N(0, I) from `rng`. With sigma_t = 0
/// this is the plain Euler step and no random numbers are drawn.
std::vector<double> euler_maruyama_step(std::span<const double> x, std::span<const double> w, double sigma_t,
                                        double dt, Rng& rng);
void euler_maruyama_step_inplace(std::span<double> x, std::span<const double> w, double sigma_t, double dt,
                                 Rng& rng);

/// Velocity at (x, t) and, when sigma_t > 0, the score from `source`.
/// The score is evaluated at t clipped to [kScoreTimeEpsilon, 1 - kScoreTimeEpsilon].
void evaluate_velocity_and_score(const VelocityField& field, const ScoreSource& source, const PointSet& x,
                                 double t, bool need_score, PointSet& velocity, PointSet& score);

/// Euler-Maruyama integration of dY = (v + sigma^2/2 score) dt + sigma dB from
/// t = 0 to 1 with dt = 1 / n_steps. Sample i draws its noise from
/// rng.split({i}), so results do not depend on how the batch is partitioned.
/// With sigma == 0 the result is bit-identical to integrate_ode_final.
PointSet integrate_sde(const VelocityField& field, const ScoreSource& source, const NoiseSchedule& noise,
                       const PointSet& x0, std::size_t n_steps, const Rng& rng);

}  // namespace flowsteer

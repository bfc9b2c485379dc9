#pragma once

// Feynman-Kac steering of flow / SDE inference.
//
// S particles are propagated together. At each resampling event a reward r is
// estimated per particle (the potential at the current point, at the one-shot
// Euler extrapolation to t = 1, or at a second-order extrapolation), turned
// into a potential G by one of the schedules below, and the ensemble is
// resampled in proportion to G. The final event happens at t = 1, and for
// every schedule the product of the G values emitted along a surviving path
// equals exp(-lambda U(x_final)).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowsteer/point_set.hpp"
#include "flowsteer/potentials.hpp"
#include "flowsteer/rng.hpp"
#include "flowsteer/sampler.hpp"
#include "flowsteer/score_sde.hpp"
#include "flowsteer/velocity_model.hpp"

namespace flowsteer {

enum class PotentialSchedule { difference, max, sum, harmonic_sum };
enum class EstimateOrder { zeroth, one_shot, second_order };
enum class ResamplingMethod { multinomial, systematic };

std::string_view to_string(PotentialSchedule s);
PotentialSchedule parse_potential_schedule(std::string_view name);
std::string_view to_string(EstimateOrder e);
EstimateOrder parse_estimate_order(std::string_view name);
std::string_view to_string(ResamplingMethod m);
ResamplingMethod parse_resampling_method(std::string_view name);

struct SteeringConfig {
  double lambda = 1.0;
  PotentialSchedule schedule = PotentialSchedule::harmonic_sum;
  std::size_t particles = 32;
  std::size_t steps = 50;
  std::size_t resample_every = 3;
  EstimateOrder estimate = EstimateOrder::one_shot;
  /// Propagate with the plain flow ODE even if a noise schedule is given.
  bool deterministic = false;
  ResamplingMethod resampling = ResamplingMethod::multinomial;

  void validate() const;
  /// Events happen after every `resample_every` steps and after the last step.
  bool is_resampling_step(std::size_t step) const;
  /// Planned number of events L.
  std::size_t resampling_events() const;
};

// --- terminal-point estimates ------------------------------------------------

/// x + horizon * v
std::vector<double> one_shot_estimate(std::span<const double> x, std::span<const double> v, double horizon);

/// x + (1 - t) v, with v the velocity already computed at (x, t).
std::vector<double> one_shot_terminal_estimate(std::span<const double> x, std::span<const double> v, double t);

/// x + (1-t) v + (1-t)^2 / (2 (t - t_prev)) (v - v_prev). Valid only when the
/// step from t_prev to t was a deterministic ODE step; pass
/// `previous_step_diffusive = true` otherwise and it throws ContractViolation.
std::vector<double> second_order_terminal_estimate(std::span<const double> x, std::span<const double> v,
                                                   std::span<const double> v_prev, double t, double t_prev,
                                                   bool previous_step_diffusive = false);

// --- potential schedules -----------------------------------------------------

/// Reward multiplier 1 / ((L + 1 - l) H_L) at event l (1-based) of L.
double harmonic_reward_scale(std::size_t event, std::size_t total_events);

/// What a particle carries between events.
struct RewardHistory {
  std::vector<double> rewards;  // r_1 .. r_l, unscaled
  double log_weight_sum = 0.0;  // sum of log G emitted so far along the path
};

/// log G for event `event` (1-based; `history.rewards` already holds r_event).
/// difference:   -lambda (r_l - r_{l-1}), r_0 = 0.
/// max:          -lambda max_{m<=l} r_m.
/// sum:          -lambda sum_{m<=l} r_m.
/// harmonic_sum: sum with r_m scaled by harmonic_reward_scale(m, L).
/// When `final_energy` is set (last event, t = 1) max/sum/harmonic_sum return
/// the terminal correction -lambda U - history.log_weight_sum instead.
double schedule_log_weight(PotentialSchedule kind, double lambda, const RewardHistory& history,
                           std::size_t event, std::size_t total_events,
                           std::optional<double> final_energy = std::nullopt);

double schedule_weight(PotentialSchedule kind, double lambda, const RewardHistory& history, std::size_t event,
                       std::size_t total_events, std::optional<double> final_energy = std::nullopt);

/// exp(log_w - max log_w). Throws DegenerateEnsembleError if no entry is finite.
std::vector<double> normalized_weights(std::span<const double> log_weights);

// --- resampling --------------------------------------------------------------

/// S independent categorical draws proportional to `weights`.
/// Throws DegenerateEnsembleError for all-zero, negative or non-finite weights.
std::vector<std::size_t> multinomial_resample(std::span<const double> weights, Rng& rng);

/// One uniform offset, S evenly spaced pointers.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, Rng& rng);

/// (sum w)^2 / sum w^2
double effective_sample_size(std::span<const double> weights);

// --- samplers ----------------------------------------------------------------

struct EventDiagnostics {
  std::size_t step = 0;  // integration step after which the event happened (0-based)
  double t = 0.0;
  double ess = 0.0;
  std::size_t distinct_ancestors = 0;  // after resampling
  double reward_min = 0.0;
  double reward_median = 0.0;
  double reward_max = 0.0;
};

struct SteeringResult {
  PointSet samples;
  std::vector<EventDiagnostics> events;
  /// Per final particle: sum of log G emitted along its path.
  std::vector<double> path_log_weights;
  /// Per final particle: U(x_final).
  std::vector<double> final_energies;
  /// Per final particle: its slot index at the start and after every event.
  std::vector<std::vector<std::size_t>> ancestry;
  /// Sum of path_log_weights.
  double log_weight_checksum = 0.0;

  std::size_t distinct_ancestors() const;
  /// Number of distinct terminal states (exact equality).
  std::size_t distinct_samples() const;
};

/// Runs the steered sampler. Particle s draws its prior point and its noise
/// from rng.split({0, s}); resampling uses rng.split({1}).
SteeringResult fk_sample(const VelocityField& field, const ScoreSource& score, const NoiseSchedule& noise,
                         const Potential& potential, const SteeringConfig& config, const PointSampler& prior,
                         const Rng& rng);

struct ImportanceResult {
  PointSet samples;
  PointSet proposals;
  std::vector<double> weights;  // normalised to max 1
  double ess = 0.0;
};

/// n unsteered terminal samples (SDE, or ODE when the noise is zero), weighted
/// by exp(-lambda U) and resampled multinomially.
ImportanceResult importance_sample(const VelocityField& field, const ScoreSource& score,
                                   const NoiseSchedule& noise, const Potential& potential, double lambda,
                                   std::size_t n, std::size_t steps, const PointSampler& prior, const Rng& rng);

/// step,t,ess,distinct_ancestors,reward_min,reward_median,reward_max
void write_diagnostics_csv(const std::string& path, std::span<const EventDiagnostics> events);

}  // namespace flowsteer

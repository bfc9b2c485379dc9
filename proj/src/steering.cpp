#include "flowsteer/steering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "flowsteer/error.hpp"
#include "flowsteer/kernels.hpp"
#include "format.hpp"

namespace flowsteer {

std::string_view to_string(PotentialSchedule s) {
  switch (s) {
    case PotentialSchedule::difference: return "difference";
    case PotentialSchedule::max: return "max";
    case PotentialSchedule::sum: return "sum";
    case PotentialSchedule::harmonic_sum: return "harmonic_sum";
  }
  return "?";
}

PotentialSchedule parse_potential_schedule(std::string_view name) {
  if (name == "difference") return PotentialSchedule::difference;
  if (name == "max") return PotentialSchedule::max;
  if (name == "sum") return PotentialSchedule::sum;
  if (name == "harmonic_sum") return PotentialSchedule::harmonic_sum;
  throw ConfigError("unknown potential schedule '" + std::string(name) + "'");
}

std::string_view to_string(EstimateOrder e) {
  switch (e) {
    case EstimateOrder::zeroth: return "zeroth";
    case EstimateOrder::one_shot: return "one_shot";
    case EstimateOrder::second_order: return "second_order";
  }
  return "?";
}

EstimateOrder parse_estimate_order(std::string_view name) {
  if (name == "zeroth") return EstimateOrder::zeroth;
  if (name == "one_shot") return EstimateOrder::one_shot;
  if (name == "second_order") return EstimateOrder::second_order;
  throw ConfigError("unknown estimate order '" + std::string(name) + "'");
}

std::string_view to_string(ResamplingMethod m) {
  return m == ResamplingMethod::multinomial ? "multinomial" : "systematic";
}

ResamplingMethod parse_resampling_method(std::string_view name) {
  if (name == "multinomial") return ResamplingMethod::multinomial;
  if (name == "systematic") return ResamplingMethod::systematic;
  throw ConfigError("unknown resampling method '" + std::string(name) + "'");
}

void SteeringConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("steering: lambda must be finite and >= 0");
  if (particles == 0) throw DomainError("steering: particles must be >= 1");
  if (steps == 0) throw DomainError("steering: steps must be >= 1");
  if (resample_every == 0) throw DomainError("steering: resample_every must be >= 1");
  if (resample_every > steps) throw DomainError("steering: resample_every must not exceed steps");
}

bool SteeringConfig::is_resampling_step(std::size_t step) const {
  return step + 1 == steps || (step + 1) % resample_every == 0;
}

std::size_t SteeringConfig::resampling_events() const {
  std::size_t n = steps / resample_every;
  if (steps % resample_every != 0) ++n;
  return n;
}

// --- estimates ---------------------------------------------------------------

std::vector<double> one_shot_estimate(std::span<const double> x, std::span<const double> v, double horizon) {
  if (x.size() != v.size()) throw DomainError("one_shot_estimate: size mismatch");
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += horizon * v[i];
  return y;
}

std::vector<double> one_shot_terminal_estimate(std::span<const double> x, std::span<const double> v, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("one_shot_terminal_estimate: t outside [0, 1]");
  return one_shot_estimate(x, v, 1.0 - t);
}

std::vector<double> second_order_terminal_estimate(std::span<const double> x, std::span<const double> v,
                                                   std::span<const double> v_prev, double t, double t_prev,
                                                   bool previous_step_diffusive) {
  if (previous_step_diffusive)
    throw ContractViolation("second-order estimate needs a deterministic previous step");
  if (x.size() != v.size() || x.size() != v_prev.size())
    throw DomainError("second_order_terminal_estimate: size mismatch");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("second_order_terminal_estimate: t outside [0, 1]");
  if (!(t > t_prev)) throw DomainError("second_order_terminal_estimate: requires t > t_prev");
  const double h = 1.0 - t;
  const double c = h * h / (2.0 * (t - t_prev));
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + h * v[i] + c * (v[i] - v_prev[i]);
  return y;
}

// --- schedules ---------------------------------------------------------------

double harmonic_reward_scale(std::size_t event, std::size_t total_events) {
  if (event == 0 || event > total_events) throw DomainError("harmonic_reward_scale: event outside [1, L]");
  double h = 0.0;
  for (std::size_t m = 1; m <= total_events; ++m) h += 1.0 / static_cast<double>(m);
  return 1.0 / (static_cast<double>(total_events + 1 - event) * h);
}

double schedule_log_weight(PotentialSchedule kind, double lambda, const RewardHistory& history,
                           std::size_t event, std::size_t total_events, std::optional<double> final_energy) {
  const auto& r = history.rewards;
  if (event == 0 || event > r.size()) throw DomainError("schedule_log_weight: history shorter than event index");
  if (kind == PotentialSchedule::difference) {
    const double previous = event >= 2 ? r[event - 2] : 0.0;
    const double current = final_energy ? *final_energy : r[event - 1];
    return -lambda * (current - previous);
  }
  if (final_energy) return -lambda * *final_energy - history.log_weight_sum;
  switch (kind) {
    case PotentialSchedule::max:
      return -lambda * *std::max_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(event));
    case PotentialSchedule::sum:
      return -lambda * std::accumulate(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(event), 0.0);
    case PotentialSchedule::harmonic_sum: {
      double acc = 0.0;
      for (std::size_t m = 1; m <= event; ++m) acc += r[m - 1] * harmonic_reward_scale(m, total_events);
      return -lambda * acc;
    }
    case PotentialSchedule::difference: break;
  }
  return 0.0;
}

double schedule_weight(PotentialSchedule kind, double lambda, const RewardHistory& history, std::size_t event,
                       std::size_t total_events, std::optional<double> final_energy) {
  return std::exp(schedule_log_weight(kind, lambda, history, event, total_events, final_energy));
}

std::vector<double> normalized_weights(std::span<const double> log_weights) {
  double top = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw)) throw DegenerateEnsembleError("log weight is NaN");
    if (lw != std::numeric_limits<double>::infinity()) top = std::max(top, lw);
    else throw DegenerateEnsembleError("log weight is +inf");
  }
  if (!std::isfinite(top)) throw DegenerateEnsembleError("every particle has zero weight");
  std::vector<double> w(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i] - top);
  return w;
}

// --- resampling --------------------------------------------------------------

namespace {

std::vector<double> cumulative_weights(std::span<const double> weights) {
  if (weights.empty()) throw DegenerateEnsembleError("resampling an empty ensemble");
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0)
      throw DegenerateEnsembleError("resampling weight " + std::to_string(i) + " is negative or non-finite");
    acc += weights[i];
    cdf[i] = acc;
  }
  if (!(acc > 0.0) || !std::isfinite(acc)) throw DegenerateEnsembleError("resampling weights sum to zero");
  return cdf;
}

std::size_t locate(const std::vector<double>& cdf, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  auto idx = static_cast<std::size_t>(it - cdf.begin());
  idx = std::min(idx, cdf.size() - 1);
  // Never land on a zero-weight entry through rounding at the top end.
  while (idx > 0 && cdf[idx] == cdf[idx - 1]) --idx;
  return idx;
}

}  // namespace

std::vector<std::size_t> multinomial_resample(std::span<const double> weights, Rng& rng) {
  const auto cdf = cumulative_weights(weights);
  const double total = cdf.back();
  std::vector<std::size_t> out(weights.size());
  for (auto& o : out) o = locate(cdf, rng.uniform() * total);
  return out;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, Rng& rng) {
  const auto cdf = cumulative_weights(weights);
  const double total = cdf.back();
  const std::size_t n = weights.size();
  const double u0 = rng.uniform();
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = locate(cdf, (static_cast<double>(i) + u0) / static_cast<double>(n) * total);
  return out;
}

double effective_sample_size(std::span<const double> weights) {
  // Scaling by the largest weight makes equal weights give exactly S.
  double top = 0.0;
  for (double w : weights) top = std::max(top, w);
  if (!(top > 0.0) || !std::isfinite(top)) throw DegenerateEnsembleError("effective_sample_size: degenerate weights");
  double s = 0.0, s2 = 0.0;
  for (double w : weights) {
    const double u = w / top;
    s += u;
    s2 += u * u;
  }
  return s * s / s2;
}

// --- samplers ----------------------------------------------------------------

std::size_t SteeringResult::distinct_ancestors() const {
  std::set<std::size_t> roots;
  for (const auto& a : ancestry)
    if (!a.empty()) roots.insert(a.front());
  return roots.size();
}

std::size_t SteeringResult::distinct_samples() const {
  std::set<std::vector<double>> rows;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto r = samples.row(i);
    rows.emplace(r.begin(), r.end());
  }
  return rows.size();
}

namespace {

template <typename T>
void permute(std::vector<T>& items, std::span<const std::size_t> idx) {
  std::vector<T> next;
  next.reserve(idx.size());
  for (std::size_t i : idx) next.push_back(items[i]);
  items = std::move(next);
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lo);
  }
  return m;
}

}  // namespace

SteeringResult fk_sample(const VelocityField& field, const ScoreSource& score, const NoiseSchedule& noise,
                         const Potential& potential, const SteeringConfig& config, const PointSampler& prior,
                         const Rng& rng) {
  config.validate();
  noise.validate();
  const std::size_t d = field.dim();
  if (potential.dim != d) throw DomainError("fk_sample: potential dimension does not match field");
  const std::size_t n = config.particles;
  const std::size_t total_events = config.resampling_events();
  const double dt = 1.0 / static_cast<double>(config.steps);
  const bool stochastic = !config.deterministic && !noise.is_zero();

  std::vector<Rng> streams;
  streams.reserve(n);
  for (std::size_t s = 0; s < n; ++s) streams.push_back(rng.split({0, s}));
  Rng resampler = rng.split({1});

  PointSet x(n, d), v(n, d), v_prev(n, d), sc;
  for (std::size_t s = 0; s < n; ++s) prior(streams[s], x.row(s));
  if (!x.all_finite()) throw NumericError("fk_sample: prior produced a non-finite point");

  std::vector<RewardHistory> history(n);
  std::vector<std::vector<std::size_t>> ancestry(n);
  for (std::size_t s = 0; s < n; ++s) ancestry[s] = {s};

  SteeringResult result;
  bool velocity_current = false;
  bool last_step_diffusive = false;
  std::size_t event = 0;
  std::vector<double> rewards(n), log_w(n);

  for (std::size_t k = 0; k < config.steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double sigma = stochastic ? noise.at(t) : 0.0;
    if (sigma > 0.0) {
      evaluate_velocity_and_score(field, score, x, t, true, v, sc);
    } else if (!velocity_current) {
      field.evaluate_at(x, t, v);
    }
    if (sigma > 0.0) {
      for (std::size_t s = 0; s < n; ++s) {
        const auto w = corrected_drift(v.row(s), sc.row(s), sigma);
        euler_maruyama_step_inplace(x.row(s), w, sigma, dt, streams[s]);
      }
    } else {
      kernels::axpy(x.flat().size(), dt, v.flat().data(), x.flat().data());
    }
    if (!x.all_finite()) throw NumericError("fk_sample: non-finite state after step " + std::to_string(k));
    last_step_diffusive = sigma > 0.0;
    std::swap(v, v_prev);
    velocity_current = false;

    if (!config.is_resampling_step(k)) continue;
    ++event;
    const bool last = k + 1 == config.steps;
    const double t_next = last ? 1.0 : static_cast<double>(k + 1) * dt;
    if (config.estimate != EstimateOrder::zeroth && !last) {
      field.evaluate_at(x, t_next, v);
      velocity_current = true;
    }
    for (std::size_t s = 0; s < n; ++s) {
      double r;
      if (last || config.estimate == EstimateOrder::zeroth) {
        r = potential(x.row(s));
      } else if (config.estimate == EstimateOrder::one_shot) {
        r = potential(one_shot_terminal_estimate(x.row(s), v.row(s), t_next));
      } else {
        r = potential(second_order_terminal_estimate(x.row(s), v.row(s), v_prev.row(s), t_next, t_next - dt,
                                                     last_step_diffusive));
      }
      rewards[s] = r;
      history[s].rewards.push_back(r);
      log_w[s] = schedule_log_weight(config.schedule, config.lambda, history[s], event, total_events,
                                     last ? std::optional<double>(r) : std::nullopt);
      history[s].log_weight_sum += log_w[s];
    }

    const auto weights = normalized_weights(log_w);
    EventDiagnostics diag;
    diag.step = k;
    diag.t = t_next;
    diag.ess = effective_sample_size(weights);
    diag.reward_min = *std::min_element(rewards.begin(), rewards.end());
    diag.reward_max = *std::max_element(rewards.begin(), rewards.end());
    diag.reward_median = median_of(rewards);

    const auto idx = config.resampling == ResamplingMethod::multinomial ? multinomial_resample(weights, resampler)
                                                                        : systematic_resample(weights, resampler);
    x = x.gather(idx);
    v_prev = v_prev.gather(idx);
    if (velocity_current) v = v.gather(idx);
    permute(history, idx);
    permute(ancestry, idx);
    std::set<std::size_t> roots;
    for (std::size_t s = 0; s < n; ++s) {
      ancestry[s].push_back(s);
      roots.insert(ancestry[s].front());
    }
    diag.distinct_ancestors = roots.size();
    result.events.push_back(diag);
  }

  result.samples = std::move(x);
  result.ancestry = std::move(ancestry);
  result.path_log_weights.resize(n);
  result.final_energies.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    result.path_log_weights[s] = history[s].log_weight_sum;
    result.final_energies[s] = potential(result.samples.row(s));
    result.log_weight_checksum += history[s].log_weight_sum;
  }
  return result;
}

ImportanceResult importance_sample(const VelocityField& field, const ScoreSource& score,
                                   const NoiseSchedule& noise, const Potential& potential, double lambda,
                                   std::size_t n, std::size_t steps, const PointSampler& prior, const Rng& rng) {
  if (n == 0) throw DomainError("importance_sample: n must be >= 1");
  if (potential.dim != field.dim()) throw DomainError("importance_sample: potential dimension does not match field");
  const std::size_t d = field.dim();
  PointSet x0(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    Rng stream = rng.split({0, i});
    prior(stream, x0.row(i));
  }
  ImportanceResult out;
  out.proposals = integrate_sde(field, score, noise, x0, steps, rng.split({2}));
  std::vector<double> log_w(n);
  for (std::size_t i = 0; i < n; ++i) log_w[i] = -lambda * potential(out.proposals.row(i));
  out.weights = normalized_weights(log_w);
  out.ess = effective_sample_size(out.weights);
  Rng resampler = rng.split({1});
  const auto idx = multinomial_resample(out.weights, resampler);
  out.samples = out.proposals.gather(idx);
  return out;
}

void write_diagnostics_csv(const std::string& path, std::span<const EventDiagnostics> events) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "step,t,ess,distinct_ancestors,reward_min,reward_median,reward_max\n";
  for (const auto& e : events) {
    out << e.step << ',' << detail::format_double(e.t) << ',' << detail::format_double(e.ess) << ','
        << e.distinct_ancestors << ',' << detail::format_double(e.reward_min) << ','
        << detail::format_double(e.reward_median) << ',' << detail::format_double(e.reward_max) << '\n';
  }
}

}  // namespace flowsteer

#include "flowsteer/score_sde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowsteer/error.hpp"
#include "flowsteer/kernels.hpp"

namespace flowsteer {

std::string_view to_string(NoiseKind k) { return k == NoiseKind::constant ? "constant" : "linear_decay"; }

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "constant") return NoiseKind::constant;
  if (name == "linear_decay") return NoiseKind::linear_decay;
  throw ConfigError("unknown noise schedule '" + std::string(name) + "'");
}

std::string_view to_string(ScoreSourceKind k) {
  return k == ScoreSourceKind::analytic_gaussian ? "analytic_gaussian" : "learned";
}

ScoreSourceKind parse_score_source(std::string_view name) {
  if (name == "analytic_gaussian") return ScoreSourceKind::analytic_gaussian;
  if (name == "learned") return ScoreSourceKind::learned;
  throw ConfigError("unknown score source '" + std::string(name) + "'");
}

double NoiseSchedule::at(double t) const {
  switch (kind) {
    case NoiseKind::constant:
      return sigma0;
    case NoiseKind::linear_decay:
      return sigma0 + (sigma1 - sigma0) * t;
  }
  return 0.0;
}

bool NoiseSchedule::is_zero() const { return sigma0 == 0.0 && (kind == NoiseKind::constant || sigma1 == 0.0); }

void NoiseSchedule::validate() const {
  if (!(sigma0 >= 0.0) || !std::isfinite(sigma0)) throw DomainError("noise sigma0 must be finite and >= 0");
  if (kind == NoiseKind::linear_decay && (!(sigma1 >= 0.0) || !std::isfinite(sigma1)))
    throw DomainError("noise sigma1 must be finite and >= 0");
}

void gaussian_score_from_velocity(std::span<const double> x, std::span<const double> v, double t,
                                  ScheduleParams schedule, std::span<double> score) {
  if (x.size() != v.size() || score.size() != x.size()) throw DomainError("score: dimension mismatch");
  if (!(t >= kScoreTimeEpsilon && t <= 1.0 - kScoreTimeEpsilon))
    throw SingularityError("velocity-to-score conversion is singular at t = " + std::to_string(t));
  const auto s = schedule.at(t);
  if (s.alpha == 0.0) throw SingularityError("velocity-to-score conversion needs alpha(t) != 0");
  const double ratio = s.alpha_dot / s.alpha;
  const double denom = s.beta * (ratio * s.beta - s.beta_dot);
  if (denom == 0.0 || !std::isfinite(denom)) throw SingularityError("velocity-to-score denominator vanishes");
  const double gain = 1.0 / denom;
  for (std::size_t i = 0; i < x.size(); ++i) score[i] = gain * (v[i] - ratio * x[i]);
}

std::vector<double> gaussian_score_from_velocity(std::span<const double> x, std::span<const double> v, double t,
                                                 ScheduleParams schedule) {
  std::vector<double> out(x.size());
  gaussian_score_from_velocity(x, v, t, schedule, out);
  return out;
}

std::vector<double> corrected_drift(std::span<const double> v, std::span<const double> score, double sigma_t) {
  if (v.size() != score.size()) throw DomainError("corrected drift: dimension mismatch");
  std::vector<double> w(v.begin(), v.end());
  if (sigma_t == 0.0) return w;
  const double gain = 0.5 * sigma_t * sigma_t;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += gain * score[i];
  for (double c : w)
    if (!std::isfinite(c)) throw NumericError("corrected drift is not finite");
  return w;
}

void euler_maruyama_step_inplace(std::span<double> x, std::span<const double> w, double sigma_t, double dt,
                                 Rng& rng) {
  if (x.size() != w.size()) throw DomainError("Euler-Maruyama: dimension mismatch");
  if (!(dt > 0.0)) throw DomainError("Euler-Maruyama: dt must be positive");
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += dt * w[i];
  if (sigma_t == 0.0) return;
  const double scale = std::sqrt(dt) * sigma_t;
  for (auto& xi : x) xi += scale * rng.normal();
}

std::vector<double> euler_maruyama_step(std::span<const double> x, std::span<const double> w, double sigma_t,
                                        double dt, Rng& rng) {
  std::vector<double> out(x.begin(), x.end());
  euler_maruyama_step_inplace(out, w, sigma_t, dt, rng);
  return out;
}

void evaluate_velocity_and_score(const VelocityField& field, const ScoreSource& source, const PointSet& x,
                                 double t, bool need_score, PointSet& velocity, PointSet& score) {
  const std::size_t n = x.size(), d = x.dim();
  if (velocity.size() != n || velocity.dim() != d) velocity = PointSet(n, d);
  if (!need_score) {
    field.evaluate_at(x, t, velocity);
    return;
  }
  if (score.size() != n || score.dim() != d) score = PointSet(n, d);
  const double tc = std::clamp(t, kScoreTimeEpsilon, 1.0 - kScoreTimeEpsilon);
  if (source.kind == ScoreSourceKind::learned) {
    if (!field.has_score()) throw DomainError("learned score requested from a field without a score head");
    if (tc == t) {
      field.evaluate_at(x, t, velocity, &score);
    } else {
      PointSet unused;
      field.evaluate_at(x, t, velocity);
      field.evaluate_at(x, tc, unused, &score);
    }
    return;
  }
  field.evaluate_at(x, t, velocity);
  if (tc == t) {
    gaussian_score_from_velocity(x.flat(), velocity.flat(), t, source.schedule, score.flat());
  } else {
    PointSet v_clipped;
    field.evaluate_at(x, tc, v_clipped);
    gaussian_score_from_velocity(x.flat(), v_clipped.flat(), tc, source.schedule, score.flat());
  }
}

PointSet integrate_sde(const VelocityField& field, const ScoreSource& source, const NoiseSchedule& noise,
                       const PointSet& x0, std::size_t n_steps, const Rng& rng) {
  noise.validate();
  if (n_steps == 0) throw DomainError("integrate_sde: n_steps must be >= 1");
  if (x0.dim() != field.dim()) throw DomainError("integrate_sde: state dimension does not match field");
  const std::size_t n = x0.size();
  const double dt = 1.0 / static_cast<double>(n_steps);
  std::vector<Rng> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) streams.push_back(rng.split({i}));

  PointSet x = x0, v, s;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double sigma = noise.at(t);
    const bool stochastic = sigma > 0.0;
    evaluate_velocity_and_score(field, source, x, t, stochastic, v, s);
    if (!stochastic) {
      kernels::axpy(x.flat().size(), dt, v.flat().data(), x.flat().data());
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const auto w = corrected_drift(v.row(i), s.row(i), sigma);
        euler_maruyama_step_inplace(x.row(i), w, sigma, dt, streams[i]);
      }
    }
    if (!x.all_finite()) throw NumericError("integrate_sde: non-finite state after step " + std::to_string(k));
  }
  return x;
}

}  // namespace flowsteer

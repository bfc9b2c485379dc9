#include "flowsteer/training.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "flowsteer/assignment.hpp"
#include "flowsteer/conditional_path.hpp"
#include "flowsteer/error.hpp"
#include "flowsteer/kernels.hpp"

namespace flowsteer {

std::string_view to_string(Coupling c) {
  return c == Coupling::independent ? "independent" : "minibatch_ot";
}

Coupling parse_coupling(std::string_view name) {
  if (name == "independent") return Coupling::independent;
  if (name == "minibatch_ot") return Coupling::minibatch_ot;
  throw ConfigError("unknown coupling '" + std::string(name) + "'");
}

std::string_view to_string(ScoreWeighting w) {
  return w == ScoreWeighting::uniform ? "uniform" : "bridge_variance";
}

ScoreWeighting parse_score_weighting(std::string_view name) {
  if (name == "uniform") return ScoreWeighting::uniform;
  if (name == "bridge_variance") return ScoreWeighting::bridge_variance;
  throw ConfigError("unknown score weighting '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw DomainError("batch size must be positive");
  if (steps == 0) throw DomainError("number of steps must be positive");
  if (!(learning_rate > 0.0)) throw DomainError("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw DomainError("Adam betas must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw DomainError("Adam epsilon must be positive");
  if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0))
    throw DomainError("final learning-rate fraction must lie in (0, 1]");
  if (!(bridge_sigma >= 0.0) || !std::isfinite(bridge_sigma)) throw DomainError("bridge noise must be >= 0");
  if (!(time_epsilon > 0.0 && time_epsilon < 0.5)) throw DomainError("time epsilon must lie in (0, 0.5)");
  if (coupling == Coupling::minibatch_ot && batch_size > kMaxExactAssignment)
    throw DomainError("minibatch OT batch exceeds the exact-assignment cap of " +
                      std::to_string(kMaxExactAssignment));
}

TrainResult train_flow(const PairSampler& sampler, const ModelSpec& spec, const TrainConfig& config) {
  config.validate();
  if (sampler.dim != spec.dim) throw DomainError("pair sampler dimension does not match model");
  if (spec.score_head && config.bridge_sigma == 0.0)
    throw DomainError("a score head needs bridge noise > 0 to have a regression target");

  VelocityModel model(spec, config.seed);
  const std::size_t d = spec.dim, n = config.batch_size;
  const std::size_t in = model.input_dim(), out = model.output_dim();
  const bool bridged = config.bridge_sigma > 0.0;
  const double t_lo = bridged ? config.time_epsilon : 0.0;
  const double t_hi = bridged ? 1.0 - config.time_epsilon : 1.0;
  const double sigma2 = config.bridge_sigma * config.bridge_sigma;

  Rng data_rng(config.seed, {0xda7aULL});
  Rng time_rng(config.seed, {0x7153ULL});
  Rng noise_rng(config.seed, {0x0015eULL});

  PointSet x0(n, d), x1(n, d);
  std::vector<double> input(n * in), output(n * out), grad_out(n * out), noise(d);
  std::vector<double> v_target(n * d), s_target(n * d), s_weight(n);
  std::vector<double> grad(model.parameters().size()), adam_m(grad.size(), 0.0), adam_v(grad.size(), 0.0);
  VelocityModel::Cache cache;
  const auto& kt = kernels::active();

  TrainResult result{std::move(model), {}};
  VelocityModel& net = result.model;
  result.loss_trace.reserve(config.steps);

  for (std::size_t step = 0; step < config.steps; ++step) {
    sampler.draw(data_rng, x0, x1);
    if (config.coupling == Coupling::minibatch_ot) {
      const auto perm = minibatch_ot_pairing(x0, x1);
      x1 = x1.gather(perm);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double t = time_rng.uniform(t_lo, t_hi);
      if (bridged) noise_rng.fill_normal(noise);
      auto sample = conditional_path_with_noise(x0.row(i), x1.row(i), t, config.bridge_sigma, noise,
                                                net.schedule());
      std::copy(sample.x_t.begin(), sample.x_t.end(), input.begin() + i * in);
      input[i * in + d] = t;
      std::copy(sample.v_target.begin(), sample.v_target.end(), v_target.begin() + i * d);
      if (spec.score_head) {
        std::copy(sample.s_target->begin(), sample.s_target->end(), s_target.begin() + i * d);
        s_weight[i] = config.score_weighting == ScoreWeighting::bridge_variance ? sigma2 * t * (1.0 - t) : 1.0;
      }
    }

    net.forward(input, n, cache, output);

    double loss = 0.0;
    const double scale = 2.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double* o = output.data() + i * out;
      double* g = grad_out.data() + i * out;
      for (std::size_t j = 0; j < d; ++j) {
        const double r = o[j] - v_target[i * d + j];
        loss += r * r;
        g[j] = scale * r;
      }
      if (spec.score_head) {
        for (std::size_t j = 0; j < d; ++j) {
          const double r = o[d + j] - s_target[i * d + j];
          loss += s_weight[i] * r * r;
          g[d + j] = scale * s_weight[i] * r;
        }
      }
    }
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "training diverged: non-finite loss at step " << step;
      if (!result.loss_trace.empty()) msg << " (previous loss " << result.loss_trace.back() << ")";
      msg << ", learning rate " << config.learning_rate << ", batch " << n;
      throw NumericError(msg.str());
    }
    result.loss_trace.push_back(loss);

    std::fill(grad.begin(), grad.end(), 0.0);
    net.backward(cache, grad_out, grad);

    double lr = config.learning_rate;
    if (config.final_lr_fraction < 1.0) {
      const double progress = static_cast<double>(step) / static_cast<double>(config.steps);
      const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
      lr *= config.final_lr_fraction + (1.0 - config.final_lr_fraction) * cosine;
    }
    const double k = static_cast<double>(step + 1);
    const double bias1 = 1.0 - std::pow(config.beta1, k);
    const double bias2 = 1.0 - std::pow(config.beta2, k);
    auto params = net.parameters();
    kt.adam_step(params.size(), params.data(), grad.data(), adam_m.data(), adam_v.data(), lr, config.beta1,
                 config.beta2, config.adam_epsilon, bias1, bias2);
  }
  return result;
}

std::vector<double> smoothed_trace(const std::vector<double>& trace, std::size_t window) {
  std::vector<double> out(trace.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    sum += trace[i];
    if (i >= window) sum -= trace[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

}  // namespace flowsteer

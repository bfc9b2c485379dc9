#include "flowsteer/velocity_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "flowsteer/error.hpp"
#include "flowsteer/kernels.hpp"
#include "flowsteer/rng.hpp"

namespace flowsteer {
namespace {

constexpr std::size_t kEvalChunk = 512;

void activate(Activation act, std::span<const double> pre, std::span<double> post) {
  switch (act) {
    case Activation::tanh:
      for (std::size_t i = 0; i < pre.size(); ++i) post[i] = std::tanh(pre[i]);
      return;
    case Activation::silu:
      for (std::size_t i = 0; i < pre.size(); ++i) post[i] = pre[i] / (1.0 + std::exp(-pre[i]));
      return;
  }
}

// grad <- grad * act'(pre)
void activation_backward(Activation act, std::span<const double> pre, std::span<const double> post,
                         std::span<double> grad) {
  switch (act) {
    case Activation::tanh:
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - post[i] * post[i];
      return;
    case Activation::silu:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-pre[i]));
        grad[i] *= s * (1.0 + pre[i] * (1.0 - s));
      }
      return;
  }
}

void broadcast_bias(std::size_t batch, std::size_t width, const double* bias, double* out) {
  for (std::size_t i = 0; i < batch; ++i) std::memcpy(out + i * width, bias, width * sizeof(double));
}

}  // namespace

void VelocityField::evaluate_at(const PointSet& x, double t, PointSet& velocity, PointSet* score) const {
  if (x.dim() != dim()) throw DomainError("evaluate_at: point dimension does not match field");
  std::vector<double> times(x.size(), t);
  if (velocity.size() != x.size() || velocity.dim() != x.dim()) velocity = PointSet(x.size(), x.dim());
  std::span<double> score_out;
  if (score != nullptr) {
    if (score->size() != x.size() || score->dim() != x.dim()) *score = PointSet(x.size(), x.dim());
    score_out = score->flat();
  }
  evaluate(x.flat(), times, velocity.flat(), score_out);
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh:
      return "tanh";
    case Activation::silu:
      return "silu";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "silu") return Activation::silu;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::vector<LayerShape> VelocityModel::make_shapes(const ModelSpec& spec, std::size_t& total) {
  if (spec.dim == 0) throw DomainError("model dimension must be positive");
  std::vector<LayerShape> shapes;
  std::size_t in = spec.dim + 1;
  total = 0;
  auto add = [&](std::size_t out) {
    if (out == 0) throw DomainError("layer width must be positive");
    shapes.push_back({in, out, total, total + in * out});
    total += in * out + out;
    in = out;
  };
  for (auto w : spec.hidden) add(w);
  add(spec.score_head ? 2 * spec.dim : spec.dim);
  return shapes;
}

std::size_t VelocityModel::parameter_count(const ModelSpec& spec) {
  std::size_t total = 0;
  make_shapes(spec, total);
  return total;
}

VelocityModel::VelocityModel(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  std::size_t total = 0;
  shapes_ = make_shapes(spec_, total);
  params_.assign(total, 0.0);
  Rng rng(seed, {0x1417ULL});
  for (const auto& s : shapes_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.in));
    for (std::size_t i = 0; i < s.in * s.out; ++i) params_[s.weight_offset + i] = rng.uniform(-bound, bound);
    for (std::size_t i = 0; i < s.out; ++i) params_[s.bias_offset + i] = rng.uniform(-bound, bound);
  }
}

VelocityModel::VelocityModel(ModelSpec spec, std::vector<double> parameters)
    : spec_(std::move(spec)), params_(std::move(parameters)) {
  std::size_t total = 0;
  shapes_ = make_shapes(spec_, total);
  if (params_.size() != total)
    throw DomainError("parameter count " + std::to_string(params_.size()) + " does not match architecture (" +
                      std::to_string(total) + ")");
}

std::uint64_t VelocityModel::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double p : params_) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &p, sizeof(double));
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void VelocityModel::forward_layers(std::span<const double> input, std::size_t batch, Cache* cache,
                                   std::vector<double>& a, std::vector<double>& b,
                                   std::span<double> output) const {
  // Without a cache, `a` holds the current activation and `b` the layer being
  // computed; activations are applied in place.
  const double* cur = input.data();
  const std::size_t n_layers = shapes_.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& s = shapes_[l];
    const bool last = l + 1 == n_layers;
    double* z = nullptr;
    if (last) {
      z = output.data();
    } else if (cache != nullptr) {
      cache->pre[l].resize(batch * s.out);
      z = cache->pre[l].data();
    } else {
      b.resize(batch * s.out);
      z = b.data();
    }
    broadcast_bias(batch, s.out, params_.data() + s.bias_offset, z);
    kernels::gemm_acc(batch, s.out, s.in, cur, s.in, params_.data() + s.weight_offset, s.out, z, s.out);
    if (last) break;
    const std::span<const double> pre{z, batch * s.out};
    if (cache != nullptr) {
      cache->post[l + 1].resize(batch * s.out);
      activate(spec_.activation, pre, cache->post[l + 1]);
      cur = cache->post[l + 1].data();
    } else {
      activate(spec_.activation, pre, b);
      std::swap(a, b);
      cur = a.data();
    }
  }
}

void VelocityModel::forward(std::span<const double> input, std::size_t batch, Cache& cache,
                            std::span<double> output) const {
  if (input.size() != batch * input_dim() || output.size() != batch * output_dim())
    throw DomainError("forward: buffer sizes do not match batch");
  cache.batch = batch;
  cache.pre.resize(shapes_.size() - 1);
  cache.post.resize(shapes_.size());
  cache.post[0].assign(input.begin(), input.end());
  std::vector<double> a, b;
  forward_layers(cache.post[0], batch, &cache, a, b, output);
}

void VelocityModel::backward(const Cache& cache, std::span<const double> grad_output,
                             std::span<double> grad) const {
  const std::size_t batch = cache.batch;
  if (grad.size() != params_.size()) throw DomainError("backward: gradient buffer has wrong size");
  if (grad_output.size() != batch * output_dim()) throw DomainError("backward: output gradient has wrong size");
  std::vector<double> dz(grad_output.begin(), grad_output.end());
  std::vector<double> da, scratch;
  for (std::size_t l = shapes_.size(); l-- > 0;) {
    const auto& s = shapes_[l];
    const auto& a_prev = cache.post[l];
    // dW += A_prev^T dZ
    scratch.resize(s.in * batch);
    kernels::transpose(batch, s.in, a_prev.data(), scratch.data());
    kernels::gemm_acc(s.in, s.out, batch, scratch.data(), batch, dz.data(), s.out,
                      grad.data() + s.weight_offset, s.out);
    double* db = grad.data() + s.bias_offset;
    for (std::size_t i = 0; i < batch; ++i) kernels::axpy(s.out, 1.0, dz.data() + i * s.out, db);
    if (l == 0) break;
    // dA_prev = dZ W^T
    scratch.resize(s.out * s.in);
    kernels::transpose(s.in, s.out, params_.data() + s.weight_offset, scratch.data());
    da.assign(batch * s.in, 0.0);
    kernels::gemm_acc(batch, s.in, s.out, dz.data(), s.out, scratch.data(), s.in, da.data(), s.in);
    activation_backward(spec_.activation, cache.pre[l - 1], cache.post[l], da);
    dz.swap(da);
  }
}

void VelocityModel::evaluate(std::span<const double> x, std::span<const double> t,
                             std::span<double> velocity, std::span<double> score) const {
  const std::size_t d = spec_.dim;
  const std::size_t n = t.size();
  if (x.size() != n * d || velocity.size() != n * d)
    throw DomainError("evaluate: buffer sizes do not match the number of times");
  if (!score.empty() && (!spec_.score_head || score.size() != n * d))
    throw DomainError("evaluate: score requested from a model without a matching score head");
  const std::size_t in = input_dim(), out = output_dim();
  std::vector<double> input, output, a, b;
  for (std::size_t start = 0; start < n; start += kEvalChunk) {
    const std::size_t m = std::min(kEvalChunk, n - start);
    input.resize(m * in);
    output.resize(m * out);
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(x.data() + (start + i) * d, d, input.data() + i * in);
      input[i * in + d] = t[start + i];
    }
    forward_layers(input, m, nullptr, a, b, output);
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(output.data() + i * out, d, velocity.data() + (start + i) * d);
      if (!score.empty()) std::copy_n(output.data() + i * out + d, d, score.data() + (start + i) * d);
    }
  }
}

}  // namespace flowsteer

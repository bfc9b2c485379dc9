#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "flowsteer/point_set.hpp"
#include "flowsteer/schedule.hpp"

namespace flowsteer {

/// Anything that maps (x, t) to a velocity and optionally a score.
/// Implementations must be safe to call concurrently on disjoint outputs.
class VelocityField {
 public:
  virtual ~VelocityField() = default;

  virtual std::size_t dim() const = 0;
  virtual bool has_score() const { return false; }
  virtual ScheduleParams schedule() const { return {}; }

  /// `x` holds n points (n*d values), `t` one time per point. Writes n*d
  /// velocity values and, if `score` is non-empty, n*d score values.
  virtual void evaluate(std::span<const double> x, std::span<const double> t,
                        std::span<double> velocity, std::span<double> score) const = 0;

  /// Same time for every row.
  void evaluate_at(const PointSet& x, double t, PointSet& velocity, PointSet* score = nullptr) const;
};

enum class Activation { tanh, silu };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct ModelSpec {
  std::size_t dim = 1;
  std::vector<std::size_t> hidden{128, 128, 128, 128};
  Activation activation = Activation::silu;
  bool score_head = false;
  ScheduleKind schedule = ScheduleKind::optimal_transport;
};

struct LayerShape {
  std::size_t in;
  std::size_t out;
  std::size_t weight_offset;  // in x out, row-major, y = x W + b
  std::size_t bias_offset;
};

/// Multilayer perceptron v_theta(x, t) on the concatenated input [x, t].
/// Hidden layers use `activation`; the output layer is linear with d outputs,
/// or 2d when the score head is enabled (velocity first, then score).
class VelocityModel final : public VelocityField {
 public:
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation from `seed`.
  VelocityModel(ModelSpec spec, std::uint64_t seed);
  /// Takes ownership of a flat parameter vector laid out as `layer_shapes()`.
  VelocityModel(ModelSpec spec, std::vector<double> parameters);

  std::size_t dim() const override { return spec_.dim; }
  bool has_score() const override { return spec_.score_head; }
  ScheduleParams schedule() const override { return {spec_.schedule}; }
  void evaluate(std::span<const double> x, std::span<const double> t, std::span<double> velocity,
                std::span<double> score) const override;

  const ModelSpec& spec() const { return spec_; }
  const std::vector<LayerShape>& layer_shapes() const { return shapes_; }
  std::size_t input_dim() const { return spec_.dim + 1; }
  std::size_t output_dim() const { return spec_.score_head ? 2 * spec_.dim : spec_.dim; }

  static std::size_t parameter_count(const ModelSpec& spec);

  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  std::uint64_t checksum() const;

  /// Activations kept by `forward` for `backward`.
  struct Cache {
    std::size_t batch = 0;
    std::vector<std::vector<double>> pre;   // per hidden layer, batch x width
    std::vector<std::vector<double>> post;  // input followed by each hidden activation
  };

  /// input: batch x (d+1), output: batch x output_dim().
  void forward(std::span<const double> input, std::size_t batch, Cache& cache,
               std::span<double> output) const;
  /// Accumulates dLoss/dParams into `grad` (same layout as parameters()).
  void backward(const Cache& cache, std::span<const double> grad_output, std::span<double> grad) const;

 private:
  static std::vector<LayerShape> make_shapes(const ModelSpec& spec, std::size_t& total);
  void forward_layers(std::span<const double> input, std::size_t batch, Cache* cache,
                      std::vector<double>& a, std::vector<double>& b, std::span<double> output) const;

  ModelSpec spec_;
  std::vector<LayerShape> shapes_;
  std::vector<double> params_;
};

}  // namespace flowsteer

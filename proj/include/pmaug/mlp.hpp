#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmaug/seed.hpp"

namespace pmaug {

enum class Activation { kLinear, kTanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation act = Activation::kTanh;
};

/// Stack of dense layers y = act(W x + b) with all parameters in one flat
/// array: for each layer, W (out x in, row-major) followed by b.
class Mlp {
 public:
  /// Activations of every layer for one input; acts[0] is the input.
  struct Tape {
    std::vector<std::vector<double>> acts;
  };

  Mlp() = default;
  explicit Mlp(std::vector<LayerShape> layers);

  /// Uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  void init_glorot(Rng& rng);

  std::size_t input_dim() const { return layers_.front().in; }
  std::size_t output_dim() const { return layers_.back().out; }
  std::size_t num_params() const { return params_.size(); }
  std::span<const LayerShape> layers() const { return layers_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> weights(std::size_t layer);
  std::span<double> biases(std::size_t layer);

  void forward(std::span<const double> x, std::span<double> y) const;
  std::vector<double> forward(std::span<const double> x) const;
  void forward(std::span<const double> x, Tape& tape) const;

  /// Backpropagates dL/dy from a forward tape: adds dL/dparams into `grad`
  /// and, when `dx` is non-empty, writes dL/dx.
  void backward(const Tape& tape, std::span<const double> dy, std::span<double> grad,
                std::span<double> dx = {}) const;

  /// Sum of squared weights, biases excluded.
  double weight_l2() const;
  /// grad += 2 * alpha * W for every weight entry.
  void add_weight_l2_grad(double alpha, std::span<double> grad) const;

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  std::vector<LayerShape> layers_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Adam with bias correction.
struct Adam {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m, v;
  std::size_t steps = 0;

  void step(std::span<double> params, std::span<const double> grad);
};

}  // namespace pmaug

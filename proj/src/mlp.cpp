#include "pmaug/mlp.hpp"

#include <cmath>
#include <random>

#include "pmaug/errors.hpp"

namespace pmaug {

std::string to_string(Activation a) { return a == Activation::kTanh ? "tanh" : "linear"; }

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "linear") return Activation::kLinear;
  throw FormatError("unknown activation '" + s + "'");
}

Mlp::Mlp(std::vector<LayerShape> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ArgumentError("Mlp: no layers");
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].in == 0 || layers_[l].out == 0) throw ArgumentError("Mlp: zero-width layer");
    if (l > 0 && layers_[l].in != layers_[l - 1].out)
      throw ArgumentError("Mlp: layer widths do not chain");
    offsets_.push_back(off);
    off += layers_[l].out * layers_[l].in + layers_[l].out;
  }
  params_.assign(off, 0.0);
}

void Mlp::init_glorot(Rng& rng) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layers_[l].in + layers_[l].out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& w : weights(l)) w = u(rng);
    for (double& b : biases(l)) b = 0.0;
  }
}

std::span<double> Mlp::weights(std::size_t layer) {
  return {params_.data() + offsets_[layer], layers_[layer].out * layers_[layer].in};
}

std::span<double> Mlp::biases(std::size_t layer) {
  return {params_.data() + offsets_[layer] + layers_[layer].out * layers_[layer].in,
          layers_[layer].out};
}

void Mlp::forward(std::span<const double> x, Tape& tape) const {
  if (x.size() != input_dim())
    throw ArgumentError("Mlp::forward: input has dimension " + std::to_string(x.size()) +
                        ", expected " + std::to_string(input_dim()));
  tape.acts.resize(layers_.size() + 1);
  tape.acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& s = layers_[l];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + s.out * s.in;
    const auto& in = tape.acts[l];
    auto& out = tape.acts[l + 1];
    out.resize(s.out);
    for (std::size_t o = 0; o < s.out; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < s.in; ++i) acc += w[o * s.in + i] * in[i];
      out[o] = s.act == Activation::kTanh ? std::tanh(acc) : acc;
    }
  }
}

void Mlp::forward(std::span<const double> x, std::span<double> y) const {
  Tape tape;
  forward(x, tape);
  std::copy(tape.acts.back().begin(), tape.acts.back().end(), y.begin());
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  std::vector<double> y(output_dim());
  forward(x, y);
  return y;
}

void Mlp::backward(const Tape& tape, std::span<const double> dy, std::span<double> grad,
                   std::span<double> dx) const {
  std::vector<double> delta(dy.begin(), dy.end()), prev;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& s = layers_[l];
    const double* w = params_.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + s.out * s.in;
    const auto& in = tape.acts[l];
    const auto& out = tape.acts[l + 1];
    if (s.act == Activation::kTanh)
      for (std::size_t o = 0; o < s.out; ++o) delta[o] *= 1.0 - out[o] * out[o];
    for (std::size_t o = 0; o < s.out; ++o) {
      gb[o] += delta[o];
      for (std::size_t i = 0; i < s.in; ++i) gw[o * s.in + i] += delta[o] * in[i];
    }
    if (l == 0 && dx.empty()) break;
    prev.assign(s.in, 0.0);
    for (std::size_t o = 0; o < s.out; ++o)
      for (std::size_t i = 0; i < s.in; ++i) prev[i] += w[o * s.in + i] * delta[o];
    delta.swap(prev);
  }
  if (!dx.empty()) std::copy(delta.begin(), delta.end(), dx.begin());
}

double Mlp::weight_l2() const {
  double s = 0.0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const double* w = params_.data() + offsets_[l];
    for (std::size_t k = 0; k < layers_[l].out * layers_[l].in; ++k) s += w[k] * w[k];
  }
  return s;
}

void Mlp::add_weight_l2_grad(double alpha, std::span<double> grad) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::size_t off = offsets_[l];
    for (std::size_t k = 0; k < layers_[l].out * layers_[l].in; ++k)
      grad[off + k] += 2.0 * alpha * params_[off + k];
  }
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& s : layers_)
    layers.push_back({{"in", s.in}, {"out", s.out}, {"activation", to_string(s.act)}});
  return {{"layers", layers}, {"params", params_}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  try {
    std::vector<LayerShape> shapes;
    for (const auto& l : j.at("layers"))
      shapes.push_back({l.at("in").get<std::size_t>(), l.at("out").get<std::size_t>(),
                        activation_from_string(l.at("activation").get<std::string>())});
    Mlp net(std::move(shapes));
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.num_params()) throw FormatError("Mlp JSON: parameter count mismatch");
    net.params_ = std::move(params);
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("Mlp JSON: ") + e.what());
  }
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (m.size() != params.size()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
    steps = 0;
  }
  ++steps;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

}  // namespace pmaug

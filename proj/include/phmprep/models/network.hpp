#pragma once

// Fully connected feed-forward network shared by the MLP classifier and the
// autoencoder. Parameters live in one flat vector: for every layer the weight
// matrix (out x in, row-major) followed by the bias.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/random.hpp"

namespace phmprep {

enum class Activation { relu, identity, sigmoid };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  if (s == "sigmoid") return Activation::sigmoid;
  throw Error(Errc::InvalidConfig, "unknown activation " + s);
}

/// binary_cross_entropy expects a single sigmoid output and is computed from
/// the logit; mean_squared_error averages over output units.
enum class Loss { binary_cross_entropy, mean_squared_error };

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::relu;
};

class Network {
 public:
  Network() = default;

  /// He-uniform initialisation for ReLU layers, Glorot-uniform otherwise; biases start at zero.
  Network(std::vector<LayerShape> shapes, std::uint64_t seed) : shapes_(std::move(shapes)) {
    std::size_t total = 0;
    for (std::size_t k = 0; k < shapes_.size(); ++k) {
      if (shapes_[k].in == 0 || shapes_[k].out == 0) throw Error(Errc::InvalidArgument, "layer of size zero");
      if (k > 0 && shapes_[k].in != shapes_[k - 1].out) throw Error(Errc::InvalidArgument, "layer sizes do not chain");
      offsets_.push_back(total);
      total += shapes_[k].out * shapes_[k].in + shapes_[k].out;
    }
    params_.assign(total, 0.0);
    Rng rng(seed);
    for (std::size_t k = 0; k < shapes_.size(); ++k) {
      const auto& s = shapes_[k];
      const double limit = s.activation == Activation::relu
                               ? std::sqrt(6.0 / static_cast<double>(s.in))
                               : std::sqrt(6.0 / static_cast<double>(s.in + s.out));
      for (std::size_t i = 0; i < s.out * s.in; ++i) params_[offsets_[k] + i] = rng.uniform(-limit, limit);
    }
  }

  Network(std::vector<LayerShape> shapes, std::vector<double> params) : shapes_(std::move(shapes)) {
    std::size_t total = 0;
    for (const auto& s : shapes_) {
      offsets_.push_back(total);
      total += s.out * s.in + s.out;
    }
    if (params.size() != total) throw Error(Errc::InvalidArgument, "parameter vector has the wrong length");
    params_ = std::move(params);
  }

  const std::vector<LayerShape>& shapes() const noexcept { return shapes_; }
  std::size_t input_size() const { return shapes_.empty() ? 0 : shapes_.front().in; }
  std::size_t output_size() const { return shapes_.empty() ? 0 : shapes_.back().out; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  const std::vector<double>& parameters() const noexcept { return params_; }
  std::vector<double>& parameters() noexcept { return params_; }

  /// Scratch buffers for one forward/backward pass.
  struct Trace {
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // post[0] = input, post[k+1] = output of layer k
    std::vector<double> delta, next_delta;
  };

  void forward(std::span<const double> x, Trace& t) const {
    t.pre.resize(shapes_.size());
    t.post.resize(shapes_.size() + 1);
    t.post[0].assign(x.begin(), x.end());
    for (std::size_t k = 0; k < shapes_.size(); ++k) {
      const auto& s = shapes_[k];
      const double* w = params_.data() + offsets_[k];
      const double* b = w + s.out * s.in;
      const auto& in = t.post[k];
      auto& pre = t.pre[k];
      auto& out = t.post[k + 1];
      pre.resize(s.out);
      out.resize(s.out);
      for (std::size_t o = 0; o < s.out; ++o) {
        double z = b[o];
        const double* wr = w + o * s.in;
        for (std::size_t i = 0; i < s.in; ++i) z += wr[i] * in[i];
        pre[o] = z;
        out[o] = activate(s.activation, z);
      }
    }
  }

  std::vector<double> predict(std::span<const double> x) const {
    Trace t;
    forward(x, t);
    return t.post.back();
  }

  /// Output of layer `k` (0-based) for one input.
  std::vector<double> layer_output(std::span<const double> x, std::size_t k) const {
    Trace t;
    forward(x, t);
    return t.post[k + 1];
  }

  /// Loss for one sample; for binary_cross_entropy the target is {0} or {1}.
  double sample_loss(std::span<const double> x, std::span<const double> target, Loss loss) const {
    Trace t;
    forward(x, t);
    return loss_from_trace(t, target, loss);
  }

  /// Adds d(loss)/d(params) for one sample into `grad` and returns the loss.
  double accumulate_gradient(std::span<const double> x, std::span<const double> target, Loss loss,
                             std::vector<double>& grad, Trace& t) const {
    forward(x, t);
    const double value = loss_from_trace(t, target, loss);
    const std::size_t last = shapes_.size() - 1;
    const auto& out = t.post.back();
    t.delta.assign(out.size(), 0.0);
    if (loss == Loss::binary_cross_entropy) {
      t.delta[0] = out[0] - target[0];  // sigmoid + cross-entropy, w.r.t. the logit
    } else {
      const double scale = 2.0 / static_cast<double>(out.size());
      for (std::size_t o = 0; o < out.size(); ++o)
        t.delta[o] = scale * (out[o] - target[o]) * derivative(shapes_[last].activation, t.pre[last][o], out[o]);
    }
    for (std::size_t k = shapes_.size(); k-- > 0;) {
      const auto& s = shapes_[k];
      const double* w = params_.data() + offsets_[k];
      double* gw = grad.data() + offsets_[k];
      double* gb = gw + s.out * s.in;
      const auto& in = t.post[k];
      for (std::size_t o = 0; o < s.out; ++o) {
        const double d = t.delta[o];
        if (d == 0.0) continue;
        double* gr = gw + o * s.in;
        for (std::size_t i = 0; i < s.in; ++i) gr[i] += d * in[i];
        gb[o] += d;
      }
      if (k == 0) break;
      t.next_delta.assign(s.in, 0.0);
      for (std::size_t o = 0; o < s.out; ++o) {
        const double d = t.delta[o];
        if (d == 0.0) continue;
        const double* wr = w + o * s.in;
        for (std::size_t i = 0; i < s.in; ++i) t.next_delta[i] += d * wr[i];
      }
      const auto& prev = shapes_[k - 1];
      for (std::size_t i = 0; i < s.in; ++i)
        t.next_delta[i] *= derivative(prev.activation, t.pre[k - 1][i], t.post[k][i]);
      std::swap(t.delta, t.next_delta);
    }
    return value;
  }

  void apply_step(std::span<const double> grad, double learning_rate) {
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i] -= learning_rate * grad[i];
  }

 private:
  static double activate(Activation a, double z) {
    switch (a) {
      case Activation::relu: return z > 0.0 ? z : 0.0;
      case Activation::identity: return z;
      case Activation::sigmoid: return sigmoid(z);
    }
    return z;
  }

  static double derivative(Activation a, double z, double y) {
    switch (a) {
      case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
      case Activation::identity: return 1.0;
      case Activation::sigmoid: return y * (1.0 - y);
    }
    return 1.0;
  }

  double loss_from_trace(const Trace& t, std::span<const double> target, Loss loss) const {
    if (loss == Loss::binary_cross_entropy) {
      const double z = t.pre.back()[0];
      return std::max(z, 0.0) - z * target[0] + std::log1p(std::exp(-std::abs(z)));
    }
    const auto& out = t.post.back();
    double sum = 0.0;
    for (std::size_t o = 0; o < out.size(); ++o) sum += (out[o] - target[o]) * (out[o] - target[o]);
    return sum / static_cast<double>(out.size());
  }

  std::vector<LayerShape> shapes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

}  // namespace phmprep

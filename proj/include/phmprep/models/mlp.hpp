#pragma once

// Binary MLP classifier: ReLU hidden layers, one sigmoid output, binary
// cross-entropy, plain mini-batch gradient descent with a fixed learning rate.

#include <cmath>
#include <string>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/matrix.hpp"
#include "phmprep/core/random.hpp"
#include "phmprep/models/network.hpp"
#include "phmprep/prepare.hpp"

namespace phmprep {

struct MlpParams {
  std::vector<std::size_t> hidden_layer_sizes{32, 16};
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;

  void validate() const {
    for (auto s : hidden_layer_sizes)
      if (s < 1) throw Error(Errc::InvalidArgument, "hidden layer size must be >= 1");
    if (!(learning_rate > 0.0)) throw Error(Errc::InvalidArgument, "learning rate must be positive");
    if (batch_size < 1) throw Error(Errc::InvalidArgument, "batch size must be >= 1");
  }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct MlpModel {
  Network net;
  MlpParams params;
  std::vector<EpochRecord> curve;
  std::vector<std::string> warnings;

  std::size_t feature_count() const { return net.input_size(); }
};

inline std::vector<LayerShape> mlp_shapes(std::size_t inputs, const std::vector<std::size_t>& hidden) {
  std::vector<LayerShape> shapes;
  std::size_t in = inputs;
  for (auto h : hidden) {
    shapes.push_back({in, h, Activation::relu});
    in = h;
  }
  shapes.push_back({in, 1, Activation::sigmoid});
  return shapes;
}

inline std::vector<double> predict_proba(const MlpModel& model, const Matrix& x) {
  if (x.rows() > 0 && x.cols() != model.feature_count())
    throw Error(Errc::FeatureMismatch, "model expects " + std::to_string(model.feature_count()) + " features, got " +
                                           std::to_string(x.cols()));
  std::vector<double> out(x.rows());
  Network::Trace t;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    model.net.forward(x.row(r), t);
    out[r] = t.post.back()[0];
  }
  return out;
}

inline std::vector<int> predict(const MlpModel& model, const Matrix& x) {
  const auto p = predict_proba(model, x);
  std::vector<int> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= 0.5 ? 1 : 0;
  return out;
}

namespace detail {

/// Mean cross-entropy and accuracy of the network on a labelled set.
inline std::pair<double, double> bce_and_accuracy(const Network& net, const LabeledSet& set) {
  if (set.size() == 0) return {0.0, 0.0};
  double loss = 0.0;
  std::size_t correct = 0;
  Network::Trace t;
  for (std::size_t r = 0; r < set.size(); ++r) {
    net.forward(set.x.row(r), t);
    const double z = t.pre.back()[0];
    const double y = set.y[r];
    loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    correct += ((t.post.back()[0] >= 0.5 ? 1 : 0) == set.y[r]);
  }
  const auto n = static_cast<double>(set.size());
  return {loss / n, static_cast<double>(correct) / n};
}

inline bool looks_unscaled(const Matrix& x) {
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double sum = 0.0, ss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      sum += x(r, c);
      ss += x(r, c) * x(r, c);
    }
    const double n = static_cast<double>(x.rows());
    const double mean = sum / n;
    const double var = ss / n - mean * mean;
    if (std::abs(mean) > 10.0 || var > 100.0) return true;
  }
  return false;
}

}  // namespace detail

inline MlpModel train_mlp(const LabeledSet& train, const LabeledSet& validation, const MlpParams& params) {
  params.validate();
  if (train.size() == 0) throw Error(Errc::EmptyInput, "train_mlp on an empty training set");
  if (validation.size() == 0) throw Error(Errc::EmptyInput, "train_mlp needs a validation set");
  if (validation.x.cols() != train.x.cols()) throw Error(Errc::FeatureMismatch, "validation width differs from train");

  MlpModel model;
  model.params = params;
  model.net = Network(mlp_shapes(train.x.cols(), params.hidden_layer_sizes), derive_seed(params.seed, "mlp.init"));
  if (detail::looks_unscaled(train.x)) model.warnings.push_back("training features look unscaled");

  Rng rng(derive_seed(params.seed, "mlp.shuffle"));
  std::vector<double> grad(model.net.parameter_count());
  Network::Trace trace;
  double target[1];
  for (std::size_t epoch = 1; epoch <= params.epochs; ++epoch) {
    const auto order = rng.permutation(train.size());
    for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
      const std::size_t stop = std::min(order.size(), start + params.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t r = order[i];
        target[0] = train.y[r];
        batch_loss += model.net.accumulate_gradient(train.x.row(r), target, Loss::binary_cross_entropy, grad, trace);
      }
      if (!std::isfinite(batch_loss)) throw Error(Errc::NonFiniteLoss, "epoch " + std::to_string(epoch));
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (double& g : grad) g *= inv;
      model.net.apply_step(grad, params.learning_rate);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    std::tie(rec.train_loss, rec.train_acc) = detail::bce_and_accuracy(model.net, train);
    std::tie(rec.val_loss, rec.val_acc) = detail::bce_and_accuracy(model.net, validation);
    if (!std::isfinite(rec.train_loss)) throw Error(Errc::NonFiniteLoss, "epoch " + std::to_string(epoch));
    model.curve.push_back(rec);
  }
  return model;
}

}  // namespace phmprep

#pragma once

// Two-layer autoencoder (encoder -> latent, decoder -> reconstruction) used as
// an unsupervised anomaly detector and as a feature extractor.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/matrix.hpp"
#include "phmprep/core/random.hpp"
#include "phmprep/models/metrics.hpp"
#include "phmprep/models/mlp.hpp"
#include "phmprep/models/network.hpp"

namespace phmprep {

struct AeModel {
  Network net;  // layer 0: encoder, layer 1: linear decoder
  std::size_t latent_dim = 0;
  double threshold = 0.0;          // rows with error > threshold are degraded
  std::vector<double> loss_curve;  // mean reconstruction error per epoch
};

inline std::vector<LayerShape> autoencoder_shapes(std::size_t inputs, std::size_t latent, Activation encoder) {
  return {{inputs, latent, encoder}, {latent, inputs, Activation::identity}};
}

/// Minimises the mean squared reconstruction error with seeded mini-batch
/// gradient descent. Only learning_rate, batch_size, epochs and seed of
/// `params` are used.
inline AeModel train_autoencoder(const Matrix& x, std::size_t latent_dim, const MlpParams& params,
                                 Activation encoder = Activation::relu) {
  params.validate();
  if (x.rows() == 0) throw Error(Errc::EmptyInput, "train_autoencoder on an empty matrix");
  if (latent_dim < 1 || latent_dim > x.cols())
    throw Error(Errc::InvalidArgument, "latent dimension must lie in [1, input dimension]");
  for (double v : x.data())
    if (!std::isfinite(v)) throw Error(Errc::MissingValues, "autoencoder input must be complete and finite");

  AeModel model;
  model.latent_dim = latent_dim;
  model.net = Network(autoencoder_shapes(x.cols(), latent_dim, encoder), derive_seed(params.seed, "ae.init"));
  Rng rng(derive_seed(params.seed, "ae.shuffle"));
  std::vector<double> grad(model.net.parameter_count());
  Network::Trace trace;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    const auto order = rng.permutation(x.rows());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
      const std::size_t stop = std::min(order.size(), start + params.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        auto row = x.row(order[i]);
        epoch_loss += model.net.accumulate_gradient(row, row, Loss::mean_squared_error, grad, trace);
      }
      if (!std::isfinite(epoch_loss)) throw Error(Errc::NonFiniteLoss, "autoencoder epoch " + std::to_string(epoch + 1));
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (double& g : grad) g *= inv;
      model.net.apply_step(grad, params.learning_rate);
    }
    model.loss_curve.push_back(epoch_loss / static_cast<double>(x.rows()));
  }
  return model;
}

/// Per-row mean squared reconstruction error.
inline std::vector<double> reconstruction_errors(const AeModel& model, const Matrix& x) {
  if (x.rows() > 0 && x.cols() != model.net.input_size()) throw Error(Errc::FeatureMismatch, "autoencoder width");
  std::vector<double> out(x.rows());
  Network::Trace t;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    model.net.forward(x.row(r), t);
    const auto& rec = t.post.back();
    double s = 0.0;
    for (std::size_t c = 0; c < rec.size(); ++c) s += (rec[c] - x(r, c)) * (rec[c] - x(r, c));
    out[r] = s / static_cast<double>(rec.size());
  }
  return out;
}

/// Latent-space representation (encoder output) of every row.
inline Matrix encode(const AeModel& model, const Matrix& x) {
  if (x.rows() > 0 && x.cols() != model.net.input_size()) throw Error(Errc::FeatureMismatch, "autoencoder width");
  Matrix out(x.rows(), model.latent_dim);
  Network::Trace t;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    model.net.forward(x.row(r), t);
    std::copy(t.post[1].begin(), t.post[1].end(), out.row(r).begin());
  }
  return out;
}

enum class ThresholdMetric { accuracy, f1 };

inline std::vector<int> classify_errors(std::span<const double> errors, double threshold) {
  std::vector<int> out(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) out[i] = errors[i] > threshold ? 1 : 0;
  return out;
}

/// Scans the midpoints between consecutive distinct errors and returns the one
/// maximising the metric on the given labels (the lowest such midpoint on ties).
inline double choose_error_threshold(std::span<const double> errors, std::span<const int> labels,
                                     ThresholdMetric metric = ThresholdMetric::accuracy) {
  if (errors.size() != labels.size()) throw Error(Errc::LengthMismatch, "errors and labels differ in length");
  std::size_t positives = 0;
  for (int y : labels) positives += (y != 0);
  if (positives == 0 || positives == labels.size()) throw Error(Errc::SingleClassInput, "both classes are required");

  std::vector<std::pair<double, int>> sorted;
  for (std::size_t i = 0; i < errors.size(); ++i) sorted.push_back({errors[i], labels[i] != 0});
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  // Predicted degraded = rows strictly above the cut. Walk cut positions
  // between distinct values, tracking how many of each class lie below.
  std::size_t below_pos = 0, below_neg = 0;
  bool found = false;
  double best_threshold = sorted.front().first;
  std::size_t best_correct = 0;
  double best_f1 = -1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    (sorted[i].second ? below_pos : below_neg) += 1;
    if (sorted[i].first == sorted[i + 1].first) continue;
    const double a = sorted[i].first, b = sorted[i + 1].first;
    double mid = (a + b) / 2.0;
    if (!(mid < b)) mid = a;
    const std::size_t tp = positives - below_pos, fn = below_pos;
    const std::size_t tn = below_neg, fp = (n - positives) - below_neg;
    if (metric == ThresholdMetric::accuracy) {
      if (!found || tp + tn > best_correct) {
        best_correct = tp + tn;
        best_threshold = mid;
      }
    } else {
      const double f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
      if (!found || f1 > best_f1) {
        best_f1 = f1;
        best_threshold = mid;
      }
    }
    found = true;
  }
  return best_threshold;
}

}  // namespace phmprep

#pragma once

// Principal component analysis on the (population) covariance matrix with a
// cyclic Jacobi eigensolver.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/matrix.hpp"

namespace phmprep {

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
};

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
/// Each eigenvector is sign-normalised so its largest-magnitude entry is positive.
inline SymmetricEigen jacobi_eigen(Matrix a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(Errc::InvalidArgument, "jacobi_eigen needs a square matrix");
  Matrix v(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double scale = 0.0;
  for (double x : a.data()) scale += x * x;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-32 * scale || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymmetricEigen out;
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.values.push_back(a(src, src));
    std::size_t arg = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (std::abs(v(k, src)) > std::abs(v(arg, src))) arg = k;
    const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = sign * v(k, src);
  }
  return out;
}

/// Column means and population covariance.
inline std::pair<std::vector<double>, Matrix> covariance(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) mean[c] += x(r, c);
  for (double& m : mean) m /= static_cast<double>(n);
  Matrix cov(d, d, 0.0);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) centered[c] = x(r, c) - mean[c];
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = centered[i];
      for (std::size_t j = i; j < d; ++j) cov(i, j) += ci * centered[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov(i, j) /= static_cast<double>(n);
      cov(j, i) = cov(i, j);
    }
  return {std::move(mean), std::move(cov)};
}

struct PcaModel {
  std::vector<double> mean;
  Matrix components;  // row j = j-th principal direction (unit norm)
  std::vector<double> eigenvalues;
  std::vector<double> explained_variance_ratio;

  std::size_t dimension() const noexcept { return mean.size(); }

  /// Cumulative explained variance; the last entry is exactly 1.
  std::vector<double> cumulative_ratio() const {
    std::vector<double> out(eigenvalues.size());
    const double total = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
    double running = 0.0;
    for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
      running += eigenvalues[j];
      out[j] = total > 0.0 ? running / total : static_cast<double>(j + 1) / static_cast<double>(eigenvalues.size());
    }
    if (!out.empty()) out.back() = 1.0;
    return out;
  }
};

inline PcaModel fit_pca(const Matrix& x) {
  if (x.rows() == 0 || x.cols() == 0) throw Error(Errc::EmptyInput, "fit_pca on an empty matrix");
  for (double v : x.data()) {
    if (std::isnan(v)) throw Error(Errc::MissingValues, "fit_pca input contains missing cells");
    if (!std::isfinite(v)) throw Error(Errc::NonFinite, "fit_pca input contains infinities");
  }
  auto [mean, cov] = covariance(x);
  SymmetricEigen eig = jacobi_eigen(std::move(cov));
  PcaModel model;
  model.mean = std::move(mean);
  const std::size_t d = x.cols();
  model.components = Matrix(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    model.eigenvalues.push_back(std::max(eig.values[j], 0.0));
    for (std::size_t k = 0; k < d; ++k) model.components(j, k) = eig.vectors(k, j);
  }
  const double total = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
  for (double ev : model.eigenvalues)
    model.explained_variance_ratio.push_back(total > 0.0 ? ev / total : 1.0 / static_cast<double>(d));
  return model;
}

/// Smallest k whose cumulative explained variance reaches the threshold.
inline std::size_t select_components(const PcaModel& model, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw Error(Errc::InvalidArgument, "threshold must lie in (0, 1]");
  const auto cum = model.cumulative_ratio();
  for (std::size_t k = 0; k < cum.size(); ++k)
    if (cum[k] >= threshold) return k + 1;
  return cum.size();
}

inline Matrix project(const PcaModel& model, std::size_t k, const Matrix& x) {
  if (k > model.dimension()) throw Error(Errc::KTooLarge, std::to_string(k) + " > " + std::to_string(model.dimension()));
  if (x.rows() > 0 && x.cols() != model.dimension()) throw Error(Errc::FeatureMismatch, "project: width differs");
  Matrix out(x.rows(), k);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < model.dimension(); ++c) s += (x(r, c) - model.mean[c]) * model.components(j, c);
      out(r, j) = s;
    }
  return out;
}

/// Maps k projected coordinates back to the input space (exact when k = d).
inline Matrix reconstruct(const PcaModel& model, const Matrix& projected) {
  const std::size_t k = projected.cols(), d = model.dimension();
  if (k > d) throw Error(Errc::KTooLarge, "reconstruct");
  Matrix out(projected.rows(), d);
  for (std::size_t r = 0; r < projected.rows(); ++r)
    for (std::size_t c = 0; c < d; ++c) {
      double s = model.mean[c];
      for (std::size_t j = 0; j < k; ++j) s += projected(r, j) * model.components(j, c);
      out(r, c) = s;
    }
  return out;
}

}  // namespace phmprep

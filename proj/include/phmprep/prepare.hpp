#pragma once

// Class balancing, disjoint train/validation/test splitting and scalers fit
// on the training rows only.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/frame.hpp"
#include "phmprep/core/matrix.hpp"
#include "phmprep/core/random.hpp"

namespace phmprep {

/// Feature matrix with binary labels (1 = degraded) and source timestamps.
struct LabeledSet {
  std::vector<std::string> feature_names;
  Matrix x;
  std::vector<int> y;
  std::vector<Timestamp> timestamps;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t positives() const { return static_cast<std::size_t>(std::count(y.begin(), y.end(), 1)); }

  LabeledSet subset(std::span<const std::size_t> rows) const {
    LabeledSet out;
    out.feature_names = feature_names;
    out.x = x.select_rows(rows);
    for (std::size_t r : rows) {
      out.y.push_back(y[r]);
      out.timestamps.push_back(timestamps[r]);
    }
    return out;
  }
};

enum class BalanceMode {
  both,       // healthy downsampled to |degraded| before splitting
  test_only,  // test set balanced, every remaining healthy row goes to train
  none,       // both classes split independently
};

struct SplitSpec {
  double test_fraction = 0.15;
  double validation_fraction = 0.10;  // of the combined train pool
  BalanceMode balance = BalanceMode::both;
  std::uint64_t seed = 0;
};

struct DataSplits {
  LabeledSet train;
  LabeledSet validation;
  LabeledSet test;
};

inline std::size_t fraction_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

namespace detail {

inline void append_rows(LabeledSet& dst, const SensorFrame& src, std::span<const std::size_t> rows, int label) {
  for (std::size_t r : rows) {
    auto values = src.row(r);
    for (double v : values)
      if (is_missing(v))
        throw Error(Errc::MissingValues, "row at t=" + std::to_string(src.timestamps()[r]) + " has missing cells");
    dst.x.append_row(values);
    dst.y.push_back(label);
    dst.timestamps.push_back(src.timestamps()[r]);
  }
}

inline LabeledSet sorted_by_time(LabeledSet set) {
  std::vector<std::size_t> order(set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return set.timestamps[a] < set.timestamps[b]; });
  return set.subset(order);
}

}  // namespace detail

/// Splits degraded rows into train/test by seeded sampling without
/// replacement, does the same for healthy rows (downsampled to the degraded
/// count when balancing), then carves the validation set out of the combined
/// train pool. Each output is sorted by timestamp.
inline DataSplits balance_and_split(const SensorFrame& healthy, const SensorFrame& degraded, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) ||
      !(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0))
    throw Error(Errc::InvalidArgument, "split fractions must lie in (0, 1)");
  if (degraded.rows() == 0) throw Error(Errc::DegradedEmpty, "no degraded rows to split");
  if (healthy.rows() > 0 && healthy.feature_names() != degraded.feature_names())
    throw Error(Errc::FeatureMismatch, "healthy and degraded frames have different columns");
  if (spec.balance != BalanceMode::none && healthy.rows() < degraded.rows())
    throw Error(Errc::HealthySmallerThanDegraded,
                std::to_string(healthy.rows()) + " healthy < " + std::to_string(degraded.rows()) + " degraded");

  Rng rng(spec.seed);
  const std::size_t n_deg = degraded.rows();
  const auto deg_order = rng.permutation(n_deg);
  const std::size_t deg_test = fraction_count(spec.test_fraction, n_deg);

  const auto healthy_order = rng.permutation(healthy.rows());
  std::size_t healthy_test = 0, healthy_train_end = 0;
  switch (spec.balance) {
    case BalanceMode::both:
      healthy_test = deg_test;
      healthy_train_end = n_deg;
      break;
    case BalanceMode::test_only:
      healthy_test = deg_test;
      healthy_train_end = healthy.rows();
      break;
    case BalanceMode::none:
      healthy_test = fraction_count(spec.test_fraction, healthy.rows());
      healthy_train_end = healthy.rows();
      break;
  }

  auto span_of = [](const std::vector<std::size_t>& v, std::size_t from, std::size_t to) {
    return std::span<const std::size_t>(v.data() + from, to - from);
  };
  LabeledSet test, pool;
  test.feature_names = pool.feature_names = degraded.feature_names();
  test.x = pool.x = Matrix(0, degraded.cols());
  detail::append_rows(test, degraded, span_of(deg_order, 0, deg_test), 1);
  detail::append_rows(test, healthy, span_of(healthy_order, 0, healthy_test), 0);
  detail::append_rows(pool, degraded, span_of(deg_order, deg_test, n_deg), 1);
  detail::append_rows(pool, healthy, span_of(healthy_order, healthy_test, healthy_train_end), 0);

  const auto pool_order = rng.permutation(pool.size());
  const std::size_t n_val = fraction_count(spec.validation_fraction, pool.size());
  DataSplits out;
  out.validation = detail::sorted_by_time(pool.subset(span_of(pool_order, 0, n_val)));
  out.train = detail::sorted_by_time(pool.subset(span_of(pool_order, n_val, pool.size())));
  out.test = detail::sorted_by_time(std::move(test));
  return out;
}

// --- scaling -----------------------------------------------------------------

enum class ScalerKind { minmax, standard };

inline const char* to_string(ScalerKind k) { return k == ScalerKind::minmax ? "minmax" : "standard"; }

inline ScalerKind parse_scaler_kind(const std::string& s) {
  if (s == "minmax") return ScalerKind::minmax;
  if (s == "standard") return ScalerKind::standard;
  throw Error(Errc::InvalidConfig, "unknown scaler kind " + s);
}

/// Per-feature affine map x -> (x - offset) / scale.
/// minmax: offset = X_m, scale = X_M - X_m. standard: offset = mu, scale = sigma (population).
struct FeatureScale {
  std::string name;
  double offset = 0.0;
  double scale = 1.0;
  bool exempt = false;  // indicator columns pass through unchanged
};

struct ScalerParams {
  ScalerKind kind = ScalerKind::standard;
  std::vector<FeatureScale> features;

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& f : features) out.push_back(f.name);
    return out;
  }
};

inline ScalerParams fit_scaler(const Matrix& train, const std::vector<std::string>& names, ScalerKind kind,
                               const std::set<std::string>& exempt = {}) {
  if (train.rows() == 0) throw Error(Errc::EmptyInput, "fit_scaler on an empty matrix");
  if (names.size() != train.cols()) throw Error(Errc::FeatureMismatch, "name count differs from column count");
  ScalerParams params;
  params.kind = kind;
  for (std::size_t c = 0; c < train.cols(); ++c) {
    FeatureScale f;
    f.name = names[c];
    if (exempt.count(f.name)) {
      f.exempt = true;
      params.features.push_back(f);
      continue;
    }
    const auto col = train.column(c);
    if (kind == ScalerKind::minmax) {
      const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
      if (!(*hi > *lo)) throw Error(Errc::DegenerateFeature, f.name);
      f.offset = *lo;
      f.scale = *hi - *lo;
    } else {
      double mean = 0.0;
      for (double v : col) mean += v;
      mean /= static_cast<double>(col.size());
      double ss = 0.0;
      for (double v : col) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / static_cast<double>(col.size()));
      if (!(sd > 0.0)) throw Error(Errc::DegenerateFeature, f.name);
      f.offset = mean;
      f.scale = sd;
    }
    params.features.push_back(f);
  }
  return params;
}

inline ScalerParams fit_scaler(const LabeledSet& train, ScalerKind kind, const std::set<std::string>& exempt = {}) {
  return fit_scaler(train.x, train.feature_names, kind, exempt);
}

inline void check_alignment(const std::vector<std::string>& names, const ScalerParams& params) {
  if (names.size() != params.features.size()) throw Error(Errc::FeatureMismatch, "feature count differs");
  for (std::size_t c = 0; c < names.size(); ++c)
    if (names[c] != params.features[c].name)
      throw Error(Errc::FeatureMismatch, "expected " + params.features[c].name + ", got " + names[c]);
}

/// Out-of-range inputs are not clipped.
inline Matrix transform(const Matrix& m, const std::vector<std::string>& names, const ScalerParams& params) {
  check_alignment(names, params);
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto& f = params.features[c];
      if (!f.exempt) row[c] = (row[c] - f.offset) / f.scale;
    }
  }
  return out;
}

inline Matrix inverse_transform(const Matrix& m, const std::vector<std::string>& names, const ScalerParams& params) {
  check_alignment(names, params);
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto& f = params.features[c];
      if (!f.exempt) row[c] = row[c] * f.scale + f.offset;
    }
  }
  return out;
}

inline LabeledSet transform(const LabeledSet& set, const ScalerParams& params) {
  LabeledSet out = set;
  out.x = transform(set.x, set.feature_names, params);
  return out;
}

}  // namespace phmprep

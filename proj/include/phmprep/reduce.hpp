#pragma once

// Statistical feature reduction: coefficient-of-variation filter and
// correlation-based deduplication.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/frame.hpp"
#include "phmprep/core/matrix.hpp"
#include "phmprep/core/random.hpp"
#include "phmprep/outlier.hpp"

namespace phmprep {

/// sigma / mu with population sigma. Empty when mu == 0.
inline std::optional<double> coefficient_of_variation(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::EmptyInput, "coefficient_of_variation");
  const double mu = mean_of(values);
  if (mu == 0.0) return std::nullopt;
  return population_std(values, mu) / mu;
}

struct CvEntry {
  std::string name;
  std::optional<double> cv;
};

struct LowVariabilityResult {
  std::vector<CvEntry> dropped;           // |cv| < threshold
  std::vector<std::string> undefined_cv;  // mu == 0 (or no data); retained
  std::vector<CvEntry> all;               // cv of every input feature
};

/// Computes cv over the non-missing cells of every column and reports which
/// fall below the threshold. The magnitude |sigma/mu| is compared so that
/// negative-valued sensors are treated like positive ones.
inline LowVariabilityResult low_variability_scan(const SensorFrame& frame, double cv_threshold) {
  if (!(cv_threshold > 0.0)) throw Error(Errc::InvalidArgument, "cv threshold must be positive");
  LowVariabilityResult out;
  for (std::size_t c = 0; c < frame.cols(); ++c) {
    const auto values = frame.present_values(c);
    CvEntry entry{frame.feature_names()[c], values.empty() ? std::nullopt : coefficient_of_variation(values)};
    out.all.push_back(entry);
    if (!entry.cv) {
      out.undefined_cv.push_back(entry.name);
    } else if (std::abs(*entry.cv) < cv_threshold) {
      out.dropped.push_back(entry);
    }
  }
  return out;
}

inline std::pair<SensorFrame, LowVariabilityResult> low_variability_filter(const SensorFrame& frame,
                                                                           double cv_threshold = 0.05) {
  auto scan = low_variability_scan(frame, cv_threshold);
  std::set<std::string> drop;
  for (const auto& d : scan.dropped) drop.insert(d.name);
  return {drop.empty() ? frame : frame.drop_columns(drop), std::move(scan)};
}

struct CorrelationMatrix {
  std::vector<std::string> feature_names;
  Matrix r;                           // symmetric; 0 where undefined
  std::vector<std::vector<bool>> degenerate_pair;  // true where a side had zero variance
  std::vector<bool> degenerate;                    // feature with zero variance over its present cells
};

/// Pearson r for one pair over rows where both values are present.
/// Returns nullopt when fewer than two rows remain or either side is constant.
inline std::optional<double> pearson_pairwise(std::span<const double> x, std::span<const double> y) {
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (is_missing(x[i]) || is_missing(y[i])) continue;
    sx += x[i];
    sy += y[i];
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (is_missing(x[i]) || is_missing(y[i])) continue;
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline CorrelationMatrix pearson_matrix(const SensorFrame& frame) {
  if (frame.rows() < 2) throw Error(Errc::TooFewRows, "pearson_matrix needs at least 2 rows");
  const std::size_t d = frame.cols();
  CorrelationMatrix m;
  m.feature_names = frame.feature_names();
  m.r = Matrix(d, d, 0.0);
  m.degenerate_pair.assign(d, std::vector<bool>(d, false));
  m.degenerate.assign(d, false);
  std::vector<std::vector<double>> columns(d);
  for (std::size_t c = 0; c < d; ++c) columns[c] = frame.column(c);
  for (std::size_t i = 0; i < d; ++i) {
    const auto present = frame.present_values(i);
    bool constant = present.size() < 2;
    if (!constant) {
      const auto [lo, hi] = std::minmax_element(present.begin(), present.end());
      constant = *lo == *hi;
    }
    m.degenerate[i] = constant;
    if (!constant) m.r(i, i) = 1.0;
    m.degenerate_pair[i][i] = constant;
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      auto r = pearson_pairwise(columns[i], columns[j]);
      if (r) {
        m.r(i, j) = m.r(j, i) = *r;
      } else {
        m.degenerate_pair[i][j] = m.degenerate_pair[j][i] = true;
      }
    }
  }
  return m;
}

struct CorrelationGroup {
  std::string kept;
  std::vector<std::string> dropped;
  std::vector<double> r_with_kept;  // signed r between each dropped member and the kept one
};

struct ReductionReport {
  std::vector<CvEntry> dropped_low_cv;
  std::vector<std::string> undefined_cv;
  std::vector<CorrelationGroup> correlation_groups;
  std::vector<std::string> final_features;
};

/// Groups features into connected components of the graph with an edge where
/// |r| > threshold, then keeps one uniformly drawn member per component.
/// Components are visited in order of their lowest feature index, so the
/// draw sequence depends only on the seed and the matrix.
inline ReductionReport correlation_dedup(const CorrelationMatrix& matrix, double threshold, std::uint64_t seed) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(Errc::InvalidArgument, "threshold must lie in (0, 1)");
  const std::size_t d = matrix.feature_names.size();
  std::vector<std::size_t> parent(d);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (!matrix.degenerate_pair[i][j] && std::abs(matrix.r(i, j)) > threshold) {
        const std::size_t a = root(i), b = root(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }

  std::vector<std::vector<std::size_t>> components;
  std::vector<std::ptrdiff_t> slot(d, -1);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t rt = root(i);
    if (slot[rt] < 0) {
      slot[rt] = static_cast<std::ptrdiff_t>(components.size());
      components.emplace_back();
    }
    components[static_cast<std::size_t>(slot[rt])].push_back(i);
  }

  Rng rng(seed);
  ReductionReport report;
  std::vector<bool> keep(d, true);
  for (const auto& comp : components) {
    if (comp.size() < 2) continue;
    const std::size_t chosen = comp[rng.index(comp.size())];
    CorrelationGroup group;
    group.kept = matrix.feature_names[chosen];
    for (std::size_t member : comp) {
      if (member == chosen) continue;
      keep[member] = false;
      group.dropped.push_back(matrix.feature_names[member]);
      group.r_with_kept.push_back(matrix.r(member, chosen));
    }
    report.correlation_groups.push_back(std::move(group));
  }
  for (std::size_t i = 0; i < d; ++i)
    if (keep[i]) report.final_features.push_back(matrix.feature_names[i]);
  return report;
}

}  // namespace phmprep

#pragma once

// Per-feature descriptive statistics, diagnostic exports for choosing
// cutoffs, and application of human-chosen cutoffs.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/frame.hpp"
#include "phmprep/core/text.hpp"

namespace phmprep {

/// Linear interpolation between order statistics: h = (n - 1) p.
/// `sorted` must be ascending and non-empty.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

/// Population standard deviation (divide by n), two-pass.
inline double population_std(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

struct FeatureStats {
  std::string name;
  std::size_t count = 0;  // non-missing cells
  double mean = kMissing;
  double std = 0.0;
  double min = kMissing;
  double max = kMissing;
  double q1 = kMissing;
  double median = kMissing;
  double q3 = kMissing;
  double low_whisker = kMissing;   // q1 - 1.5 IQR
  double high_whisker = kMissing;  // q3 + 1.5 IQR
  double p2_5 = kMissing;
  double p97_5 = kMissing;
  double missing_ratio = 0.0;
  std::optional<double> cv;  // sigma / mu; empty when mu == 0 or no data
  bool degenerate = false;   // fewer than two non-missing cells
};

inline FeatureStats describe(std::string name, std::span<const double> column) {
  FeatureStats s;
  s.name = std::move(name);
  std::vector<double> v;
  v.reserve(column.size());
  for (double x : column)
    if (!is_missing(x)) v.push_back(x);
  s.count = v.size();
  s.missing_ratio = column.empty() ? 0.0 : 1.0 - static_cast<double>(v.size()) / static_cast<double>(column.size());
  s.degenerate = v.size() < 2;
  if (v.empty()) return s;
  s.mean = mean_of(v);
  s.std = s.degenerate ? 0.0 : population_std(v, s.mean);
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile_sorted(v, 0.25);
  s.median = quantile_sorted(v, 0.5);
  s.q3 = quantile_sorted(v, 0.75);
  const double iqr = s.q3 - s.q1;
  s.low_whisker = s.q1 - 1.5 * iqr;
  s.high_whisker = s.q3 + 1.5 * iqr;
  s.p2_5 = quantile_sorted(v, 0.025);
  s.p97_5 = quantile_sorted(v, 0.975);
  if (s.mean != 0.0) s.cv = s.std / s.mean;
  return s;
}

inline std::vector<FeatureStats> compute_feature_stats(const SensorFrame& frame) {
  if (frame.empty()) throw Error(Errc::EmptyInput, "compute_feature_stats on an empty frame");
  std::vector<FeatureStats> out;
  out.reserve(frame.cols());
  for (std::size_t c = 0; c < frame.cols(); ++c) out.push_back(describe(frame.feature_names()[c], frame.column(c)));
  return out;
}

/// File-system safe variant of a feature name.
inline std::string file_stem(const std::string& name) {
  std::string out = name;
  for (char& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '=')) c = '_';
  return out;
}

/// Writes `<feature>.series.csv` (timestamp,value) for every feature plus
/// `boxplot_summary.csv`. Returns the written paths, series files first.
inline std::vector<std::filesystem::path> emit_diagnostics(const SensorFrame& frame,
                                                           const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + out_dir.string());
  std::vector<std::filesystem::path> written;
  std::string summary =
      "feature,min,q1,median,q3,max,low_whisker,high_whisker,p2_5,p97_5,missing_ratio,degenerate\n";
  for (std::size_t c = 0; c < frame.cols(); ++c) {
    const auto& name = frame.feature_names()[c];
    std::string series = "timestamp,value\n";
    for (std::size_t r = 0; r < frame.rows(); ++r) {
      const double v = frame.at(r, c);
      if (is_missing(v)) continue;
      append_int(series, frame.timestamps()[r]);
      series.push_back(',');
      append_double(series, v);
      series.push_back('\n');
    }
    auto path = out_dir / (file_stem(name) + ".series.csv");
    write_file(path, series);
    written.push_back(path);

    const FeatureStats s = describe(name, frame.column(c));
    summary += csv_escape(name);
    for (double v : {s.min, s.q1, s.median, s.q3, s.max, s.low_whisker, s.high_whisker, s.p2_5, s.p97_5,
                     s.missing_ratio}) {
      summary.push_back(',');
      append_double(summary, v);
    }
    summary += s.degenerate ? ",1\n" : ",0\n";
  }
  auto summary_path = out_dir / "boxplot_summary.csv";
  write_file(summary_path, summary);
  written.push_back(summary_path);
  return written;
}

// --- cutoffs -----------------------------------------------------------------

struct Bounds {
  std::optional<double> lower;
  std::optional<double> upper;

  bool violated_by(double v) const { return (lower && v < *lower) || (upper && v > *upper); }
};

using CutoffSpec = std::map<std::string, Bounds>;

struct FeatureOutlierCounts {
  std::string name;
  std::size_t below = 0;
  std::size_t above = 0;
  double mean_before = kMissing;
  double std_before = 0.0;
  double mean_after = kMissing;
  double std_after = 0.0;
};

struct OutlierReport {
  std::vector<FeatureOutlierCounts> features;
  std::size_t rows_removed = 0;
};

/// Removes every row with at least one cell strictly outside its feature's
/// bounds. Missing cells never trigger removal.
inline std::pair<SensorFrame, OutlierReport> apply_cutoffs(const SensorFrame& frame, const CutoffSpec& cutoffs) {
  std::vector<std::pair<std::size_t, Bounds>> bounded;
  for (const auto& [name, b] : cutoffs) {
    auto idx = frame.find(name);
    if (!idx) throw Error(Errc::UnknownFeature, name);
    if (b.lower && b.upper && !(*b.lower < *b.upper)) throw Error(Errc::InvertedBounds, name);
    bounded.emplace_back(*idx, b);
  }
  OutlierReport report;
  std::vector<bool> keep(frame.rows(), true);
  for (const auto& [col, b] : bounded) {
    FeatureOutlierCounts counts;
    counts.name = frame.feature_names()[col];
    for (std::size_t r = 0; r < frame.rows(); ++r) {
      const double v = frame.at(r, col);
      if (is_missing(v)) continue;
      if (b.lower && v < *b.lower) {
        ++counts.below;
        keep[r] = false;
      } else if (b.upper && v > *b.upper) {
        ++counts.above;
        keep[r] = false;
      }
    }
    report.features.push_back(std::move(counts));
  }
  SensorFrame out = frame;
  const auto removed = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), false));
  if (removed > 0) out = frame.select_rows(keep);
  report.rows_removed = removed;
  for (std::size_t k = 0; k < bounded.size(); ++k) {
    const std::size_t col = bounded[k].first;
    const auto before = describe("", frame.column(col));
    const auto after = describe("", out.column(col));
    auto& f = report.features[k];
    f.mean_before = before.mean;
    f.std_before = before.std;
    f.mean_after = after.mean;
    f.std_after = after.std;
  }
  return {std::move(out), std::move(report)};
}

}  // namespace phmprep

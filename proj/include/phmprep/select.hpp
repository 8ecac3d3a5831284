#pragma once

// Expert exclusion of unrelated features and missing-ratio filtering.

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/frame.hpp"

namespace phmprep {

/// Closed time window [begin, end]; an absent side is unbounded.
struct TimeWindow {
  std::optional<Timestamp> begin;
  std::optional<Timestamp> end;

  bool contains(Timestamp t) const { return (!begin || t >= *begin) && (!end || t <= *end); }
};

struct SelectionReport {
  std::vector<std::string> excluded_by_expert;
  std::vector<std::pair<std::string, double>> dropped_columns;  // (name, missing ratio)
  std::size_t dropped_row_count = 0;
  std::size_t rows_outside_window = 0;
  std::pair<std::size_t, std::size_t> remaining_shape{0, 0};
};

inline SensorFrame apply_exclusions(const SensorFrame& frame, const std::set<std::string>& exclude,
                                    const std::optional<TimeWindow>& keep_window = std::nullopt) {
  for (const auto& name : exclude)
    if (!frame.find(name) && !frame.has_categorical(name)) throw Error(Errc::UnknownFeature, name);
  SensorFrame out = exclude.empty() ? frame : frame.drop_columns(exclude);
  if (keep_window) {
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < out.rows(); ++r)
      if (keep_window->contains(out.timestamps()[r])) keep.push_back(r);
    if (keep.size() != out.rows()) out = out.select_rows(keep);
  }
  return out;
}

inline double column_missing_ratio(const SensorFrame& frame, std::size_t col) {
  if (frame.rows() == 0) return 0.0;
  std::size_t missing = 0;
  for (std::size_t r = 0; r < frame.rows(); ++r) missing += is_missing(frame.at(r, col));
  return static_cast<double>(missing) / static_cast<double>(frame.rows());
}

/// Drops columns whose missing ratio is >= col_threshold, then rows whose
/// missing ratio over the surviving columns is > row_threshold. A row
/// threshold of nullopt disables the row pass.
inline std::pair<SensorFrame, SelectionReport> missing_ratio_filter(const SensorFrame& frame, double col_threshold,
                                                                    std::optional<double> row_threshold) {
  if (col_threshold < 0.0 || col_threshold > 1.0 || (row_threshold && (*row_threshold < 0.0 || *row_threshold > 1.0)))
    throw Error(Errc::InvalidArgument, "missing-ratio thresholds must lie in [0, 1]");
  SelectionReport report;
  std::vector<std::size_t> keep_cols;
  for (std::size_t c = 0; c < frame.cols(); ++c) {
    const double ratio = column_missing_ratio(frame, c);
    if (ratio >= col_threshold) {
      report.dropped_columns.emplace_back(frame.feature_names()[c], ratio);
    } else {
      keep_cols.push_back(c);
    }
  }
  if (keep_cols.empty() && frame.cols() > 0)
    throw Error(Errc::AllColumnsDropped, "column threshold " + std::to_string(col_threshold));
  SensorFrame out = keep_cols.size() == frame.cols() ? frame : frame.select_columns(keep_cols);

  if (row_threshold && out.cols() > 0) {
    std::vector<std::size_t> keep_rows;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      std::size_t missing = 0;
      for (double v : out.row(r)) missing += is_missing(v);
      const double ratio = static_cast<double>(missing) / static_cast<double>(out.cols());
      if (!(ratio > *row_threshold)) keep_rows.push_back(r);
    }
    report.dropped_row_count = out.rows() - keep_rows.size();
    if (report.dropped_row_count > 0) out = out.select_rows(keep_rows);
  }
  report.remaining_shape = {out.rows(), out.cols()};
  return {std::move(out), std::move(report)};
}

struct SelectionConfig {
  std::set<std::string> exclude;
  std::optional<TimeWindow> keep_window;
  double column_threshold = 0.50;
  std::optional<double> row_threshold = 0.20;
};

/// Exclusions followed by the missing-ratio filter, with a single combined report.
inline std::pair<SensorFrame, SelectionReport> run_selection(const SensorFrame& frame, const SelectionConfig& cfg) {
  SensorFrame excluded = apply_exclusions(frame, cfg.exclude, cfg.keep_window);
  auto [out, report] = missing_ratio_filter(excluded, cfg.column_threshold, cfg.row_threshold);
  report.excluded_by_expert.assign(cfg.exclude.begin(), cfg.exclude.end());
  report.rows_outside_window = frame.rows() - excluded.rows();
  return {std::move(out), std::move(report)};
}

}  // namespace phmprep

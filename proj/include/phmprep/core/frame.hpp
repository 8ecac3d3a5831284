#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "phmprep/core/error.hpp"

namespace phmprep {

using Timestamp = std::int64_t;  // epoch seconds
using Duration = std::int64_t;   // seconds

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Raw text column kept alongside the numeric cells until it is encoded.
/// Missing entries are stored as the empty string.
struct CategoricalColumn {
  std::string name;
  std::vector<std::string> values;
};

/// Time-indexed numeric table. Cells are finite doubles or kMissing (NaN).
///
/// Invariants, checked on construction: timestamps strictly increasing,
/// feature names unique and non-empty, no infinite cells.
class SensorFrame {
 public:
  SensorFrame() = default;

  SensorFrame(std::vector<Timestamp> timestamps, std::vector<std::string> names, std::vector<double> values,
              std::vector<CategoricalColumn> categorical = {})
      : timestamps_(std::move(timestamps)),
        names_(std::move(names)),
        values_(std::move(values)),
        categorical_(std::move(categorical)) {
    validate();
  }

  std::size_t rows() const noexcept { return timestamps_.size(); }
  std::size_t cols() const noexcept { return names_.size(); }
  bool empty() const noexcept { return timestamps_.empty(); }

  const std::vector<Timestamp>& timestamps() const noexcept { return timestamps_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<CategoricalColumn>& categorical() const noexcept { return categorical_; }

  double at(std::size_t row, std::size_t col) const { return values_[row * names_.size() + col]; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * names_.size(), names_.size()}; }

  std::vector<double> column(std::size_t col) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, col);
    return out;
  }

  /// Non-missing cells of one column, in row order.
  std::vector<double> present_values(std::size_t col) const {
    std::vector<double> out;
    out.reserve(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
      const double v = at(r, col);
      if (!is_missing(v)) out.push_back(v);
    }
    return out;
  }

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

  std::size_t index_of(const std::string& name) const {
    if (auto idx = find(name)) return *idx;
    throw Error(Errc::ColumnNotFound, name);
  }

  bool has_categorical(const std::string& name) const {
    return std::any_of(categorical_.begin(), categorical_.end(), [&](const auto& c) { return c.name == name; });
  }

  /// Names of one-hot indicator columns; these are exempt from scaling.
  const std::set<std::string>& indicator_columns() const noexcept { return indicators_; }
  void mark_indicator(const std::string& name) { indicators_.insert(name); }

  std::optional<Duration> sampling_period_hint() const noexcept { return sampling_period_hint_; }
  void set_sampling_period_hint(std::optional<Duration> hint) { sampling_period_hint_ = hint; }

  SensorFrame select_rows(std::span<const std::size_t> indices) const {
    std::vector<Timestamp> ts;
    ts.reserve(indices.size());
    std::vector<double> vals;
    vals.reserve(indices.size() * cols());
    for (std::size_t r : indices) {
      ts.push_back(timestamps_[r]);
      auto src = row(r);
      vals.insert(vals.end(), src.begin(), src.end());
    }
    std::vector<CategoricalColumn> cats;
    for (const auto& c : categorical_) {
      CategoricalColumn sub{c.name, {}};
      sub.values.reserve(indices.size());
      for (std::size_t r : indices) sub.values.push_back(c.values[r]);
      cats.push_back(std::move(sub));
    }
    return derived(std::move(ts), names_, std::move(vals), std::move(cats));
  }

  SensorFrame select_rows(const std::vector<bool>& keep) const {
    std::vector<std::size_t> idx;
    for (std::size_t r = 0; r < keep.size(); ++r)
      if (keep[r]) idx.push_back(r);
    return select_rows(idx);
  }

  /// Keeps the given numeric columns in the given order. Categorical columns are carried over.
  SensorFrame select_columns(std::span<const std::size_t> indices) const {
    std::vector<std::string> names;
    for (std::size_t c : indices) names.push_back(names_[c]);
    std::vector<double> vals;
    vals.reserve(rows() * indices.size());
    for (std::size_t r = 0; r < rows(); ++r)
      for (std::size_t c : indices) vals.push_back(at(r, c));
    return derived(timestamps_, std::move(names), std::move(vals), categorical_);
  }

  SensorFrame select_columns(const std::vector<std::string>& names) const {
    std::vector<std::size_t> idx;
    for (const auto& n : names) idx.push_back(index_of(n));
    return select_columns(idx);
  }

  /// Removes numeric or categorical columns by name. Unknown names are ignored.
  SensorFrame drop_columns(const std::set<std::string>& drop) const {
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < cols(); ++c)
      if (!drop.count(names_[c])) keep.push_back(c);
    SensorFrame out = select_columns(keep);
    std::erase_if(out.categorical_, [&](const auto& c) { return drop.count(c.name) > 0; });
    return out;
  }

  /// Copy with the categorical column replaced by the supplied numeric columns (appended).
  SensorFrame replace_categorical(const std::string& name, std::vector<std::string> new_names,
                                  const std::vector<std::vector<double>>& new_columns) const {
    std::vector<std::string> names = names_;
    names.insert(names.end(), new_names.begin(), new_names.end());
    const std::size_t width = names.size();
    std::vector<double> vals(rows() * width);
    for (std::size_t r = 0; r < rows(); ++r) {
      auto src = row(r);
      std::copy(src.begin(), src.end(), vals.begin() + static_cast<std::ptrdiff_t>(r * width));
      for (std::size_t k = 0; k < new_columns.size(); ++k) vals[r * width + cols() + k] = new_columns[k][r];
    }
    std::vector<CategoricalColumn> cats = categorical_;
    std::erase_if(cats, [&](const auto& c) { return c.name == name; });
    return derived(timestamps_, std::move(names), std::move(vals), std::move(cats));
  }

  const CategoricalColumn& categorical_column(const std::string& name) const {
    for (const auto& c : categorical_)
      if (c.name == name) return c;
    throw Error(Errc::ColumnNotFound, name);
  }

  friend bool same_cells(const SensorFrame& a, const SensorFrame& b) {
    if (a.timestamps_ != b.timestamps_ || a.names_ != b.names_ || a.values_.size() != b.values_.size()) return false;
    for (std::size_t i = 0; i < a.values_.size(); ++i) {
      const double x = a.values_[i], y = b.values_[i];
      if (is_missing(x) != is_missing(y)) return false;
      if (!is_missing(x) && x != y) return false;
    }
    return true;
  }

 private:
  SensorFrame derived(std::vector<Timestamp> ts, std::vector<std::string> names, std::vector<double> vals,
                      std::vector<CategoricalColumn> cats) const {
    SensorFrame out;
    out.timestamps_ = std::move(ts);
    out.names_ = std::move(names);
    out.values_ = std::move(vals);
    out.categorical_ = std::move(cats);
    for (const auto& n : out.names_)
      if (indicators_.count(n)) out.indicators_.insert(n);
    out.sampling_period_hint_ = sampling_period_hint_;
    return out;
  }

  void validate() const {
    if (values_.size() != timestamps_.size() * names_.size())
      throw Error(Errc::InvalidArgument, "cell count does not match rows x columns");
    for (std::size_t i = 1; i < timestamps_.size(); ++i)
      if (timestamps_[i] <= timestamps_[i - 1])
        throw Error(Errc::InvalidArgument, "timestamps must be strictly increasing");
    std::unordered_map<std::string, int> seen;
    auto check_name = [&](const std::string& n) {
      if (n.empty()) throw Error(Errc::InvalidArgument, "empty feature name");
      if (seen[n]++) throw Error(Errc::InvalidArgument, "duplicate feature name " + n);
    };
    for (const auto& n : names_) check_name(n);
    for (const auto& c : categorical_) {
      check_name(c.name);
      if (c.values.size() != timestamps_.size())
        throw Error(Errc::InvalidArgument, "categorical column length mismatch: " + c.name);
    }
    for (double v : values_)
      if (std::isinf(v)) throw Error(Errc::InvalidArgument, "infinite cell");
  }

  std::vector<Timestamp> timestamps_;
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::vector<CategoricalColumn> categorical_;
  std::set<std::string> indicators_;
  std::optional<Duration> sampling_period_hint_;
};

/// Stacks frames with identical columns, re-sorting rows by timestamp.
inline SensorFrame concat_rows(const std::vector<const SensorFrame*>& parts) {
  if (parts.empty()) return {};
  const auto& names = parts.front()->feature_names();
  std::vector<std::pair<Timestamp, std::pair<std::size_t, std::size_t>>> order;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (parts[p]->feature_names() != names) throw Error(Errc::FeatureMismatch, "concat_rows: column sets differ");
    for (std::size_t r = 0; r < parts[p]->rows(); ++r) order.push_back({parts[p]->timestamps()[r], {p, r}});
  }
  std::sort(order.begin(), order.end());
  std::vector<Timestamp> ts;
  std::vector<double> vals;
  vals.reserve(order.size() * names.size());
  for (const auto& [t, where] : order) {
    ts.push_back(t);
    auto src = parts[where.first]->row(where.second);
    vals.insert(vals.end(), src.begin(), src.end());
  }
  return SensorFrame(std::move(ts), names, std::move(vals));
}

}  // namespace phmprep

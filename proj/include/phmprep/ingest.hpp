#pragma once

// Sensor-table and maintenance-log readers/writers, plus categorical encoding.

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/frame.hpp"
#include "phmprep/core/text.hpp"

namespace phmprep {

inline std::set<std::string> default_missing_tokens() { return {"", "NaN", "nan", "NA", "null"}; }

/// Reads a sensor CSV. Every non-time column is numeric unless named in
/// `categorical_columns`, in which case its raw text is kept for encode_categorical().
/// Cells matching a missing token or failing to parse as a finite number become kMissing.
inline SensorFrame load_sensor_frame(const std::filesystem::path& path, const std::string& time_column = "timestamp",
                                     const std::set<std::string>& missing_tokens = default_missing_tokens(),
                                     const std::set<std::string>& categorical_columns = {}) {
  const std::string text = read_file(path);
  LineCursor lines(text);
  std::string_view line;
  std::vector<std::string> fields;
  if (!lines.next(line)) throw Error(Errc::EmptyTable, path.string() + " has no header");
  split_csv_line(line, fields);
  const std::vector<std::string> header = fields;

  std::optional<std::size_t> time_idx;
  std::vector<std::size_t> numeric_idx, categorical_idx;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == time_column) {
      time_idx = i;
    } else if (categorical_columns.count(header[i])) {
      categorical_idx.push_back(i);
    } else {
      numeric_idx.push_back(i);
    }
  }
  if (!time_idx) throw Error(Errc::MissingTimeColumn, time_column + " not in header of " + path.string());
  for (const auto& name : categorical_columns)
    if (std::find(header.begin(), header.end(), name) == header.end()) throw Error(Errc::ColumnNotFound, name);

  std::vector<std::string> tokens(missing_tokens.begin(), missing_tokens.end());
  auto is_token = [&](std::string_view cell) {
    for (const auto& t : tokens)
      if (t.size() == cell.size() && t == cell) return true;
    return false;
  };

  std::vector<Timestamp> ts;
  std::vector<double> vals;
  std::vector<std::vector<std::string>> cats(categorical_idx.size());
  while (lines.next(line)) {
    if (trim(line).empty()) continue;
    split_csv_line(line, fields);
    if (fields.size() != header.size())
      throw Error(Errc::MalformedInput, path.string() + ":" + std::to_string(lines.line_number()) + " has " +
                                            std::to_string(fields.size()) + " fields, expected " +
                                            std::to_string(header.size()));
    auto t = parse_instant(fields[*time_idx]);
    if (!t)
      throw Error(Errc::MalformedInput, path.string() + ":" + std::to_string(lines.line_number()) +
                                            " bad timestamp '" + fields[*time_idx] + "'");
    ts.push_back(*t);
    for (std::size_t i : numeric_idx) {
      const std::string& cell = fields[i];
      if (is_token(cell)) {
        vals.push_back(kMissing);
      } else {
        vals.push_back(parse_finite(cell).value_or(kMissing));
      }
    }
    for (std::size_t k = 0; k < categorical_idx.size(); ++k) {
      const std::string& cell = fields[categorical_idx[k]];
      cats[k].push_back(is_token(cell) ? std::string() : cell);
    }
  }
  if (ts.empty()) throw Error(Errc::EmptyTable, path.string() + " has no data rows");

  std::vector<std::size_t> order(ts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ts[a] < ts[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (ts[order[i]] == ts[order[i - 1]])
      throw Error(Errc::DuplicateTimestamp, std::to_string(ts[order[i]]));

  const std::size_t width = numeric_idx.size();
  std::vector<Timestamp> sorted_ts(ts.size());
  std::vector<double> sorted_vals(vals.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted_ts[i] = ts[order[i]];
    std::copy_n(vals.begin() + static_cast<std::ptrdiff_t>(order[i] * width), width,
                sorted_vals.begin() + static_cast<std::ptrdiff_t>(i * width));
  }
  std::vector<std::string> names;
  for (std::size_t i : numeric_idx) names.push_back(header[i]);
  std::vector<CategoricalColumn> categorical;
  for (std::size_t k = 0; k < categorical_idx.size(); ++k) {
    CategoricalColumn col{header[categorical_idx[k]], {}};
    col.values.reserve(order.size());
    for (std::size_t i : order) col.values.push_back(cats[k][i]);
    categorical.push_back(std::move(col));
  }
  SensorFrame frame(std::move(sorted_ts), std::move(names), std::move(sorted_vals), std::move(categorical));
  if (frame.rows() >= 2) {
    // Most common spacing; informational only.
    std::map<Duration, std::size_t> gaps;
    for (std::size_t i = 1; i < frame.rows(); ++i) ++gaps[frame.timestamps()[i] - frame.timestamps()[i - 1]];
    auto best = std::max_element(gaps.begin(), gaps.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    frame.set_sampling_period_hint(best->first);
  }
  return frame;
}

/// CSV text of a frame: integer epoch timestamps, shortest round-trip doubles, "NaN" for missing.
inline std::string sensor_frame_csv(const SensorFrame& frame, const std::string& time_column = "timestamp") {
  std::string out;
  out.reserve(frame.rows() * (frame.cols() + 1) * 10 + 64);
  out += csv_escape(time_column);
  for (const auto& n : frame.feature_names()) {
    out.push_back(',');
    out += csv_escape(n);
  }
  for (const auto& c : frame.categorical()) {
    out.push_back(',');
    out += csv_escape(c.name);
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    append_int(out, frame.timestamps()[r]);
    for (double v : frame.row(r)) {
      out.push_back(',');
      append_double(out, v);
    }
    for (const auto& c : frame.categorical()) {
      out.push_back(',');
      out += c.values[r].empty() ? std::string("NaN") : csv_escape(c.values[r]);
    }
    out.push_back('\n');
  }
  return out;
}

inline void write_sensor_frame(const SensorFrame& frame, const std::filesystem::path& path,
                               const std::string& time_column = "timestamp") {
  write_file(path, sensor_frame_csv(frame, time_column));
}

// --- maintenance log ---------------------------------------------------------

enum class EventKind { normal_stop, pause, external, failure };

inline const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::normal_stop: return "normal_stop";
    case EventKind::pause: return "pause";
    case EventKind::external: return "external";
    case EventKind::failure: return "failure";
  }
  return "?";
}

inline EventKind parse_event_kind(std::string_view s) {
  if (s == "normal_stop") return EventKind::normal_stop;
  if (s == "pause") return EventKind::pause;
  if (s == "external") return EventKind::external;
  if (s == "failure") return EventKind::failure;
  throw Error(Errc::UnknownKind, std::string(s));
}

/// One stoppage or failure. The machine is down over [start, end).
struct EventRecord {
  Timestamp start = 0;
  Timestamp end = 0;
  EventKind kind = EventKind::normal_stop;
  std::optional<std::string> component;
  std::optional<std::string> failure_mode;
  std::string note;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct EventLog {
  std::vector<EventRecord> records;  // sorted by start

  std::size_t failure_count() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                  [](const auto& r) { return r.kind == EventKind::failure; }));
  }
};

inline void validate_event(const EventRecord& r) {
  if (r.end <= r.start)
    throw Error(Errc::InvertedInterval, "[" + std::to_string(r.start) + "," + std::to_string(r.end) + "]");
  if (r.failure_mode && r.kind != EventKind::failure)
    throw Error(Errc::InvalidArgument, "failure_mode given on a non-failure event at " + std::to_string(r.start));
  if (r.failure_mode && !r.component)
    throw Error(Errc::InvalidArgument, "failure_mode without component at " + std::to_string(r.start));
}

/// Validates and sorts records by (start, end). The sort is stable.
inline EventLog make_event_log(std::vector<EventRecord> records) {
  for (const auto& r : records) validate_event(r);
  std::stable_sort(records.begin(), records.end(), [](const EventRecord& a, const EventRecord& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  return EventLog{std::move(records)};
}

inline EventLog load_event_log(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  LineCursor lines(text);
  std::string_view line;
  std::vector<std::string> fields;
  if (!lines.next(line)) throw Error(Errc::EmptyTable, path.string() + " has no header");
  split_csv_line(line, fields);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < fields.size(); ++i) col[fields[i]] = i;
  for (const char* required : {"start", "end", "kind", "component", "failure_mode"})
    if (!col.count(required)) throw Error(Errc::MalformedInput, path.string() + " lacks column " + required);
  const bool has_note = col.count("note") > 0;

  std::vector<EventRecord> records;
  while (lines.next(line)) {
    if (trim(line).empty()) continue;
    split_csv_line(line, fields);
    if (fields.size() < col.size())
      throw Error(Errc::MalformedInput, path.string() + ":" + std::to_string(lines.line_number()) + " too few fields");
    EventRecord r;
    auto start = parse_instant(fields[col["start"]]);
    auto end = parse_instant(fields[col["end"]]);
    if (!start || !end)
      throw Error(Errc::MalformedInput, path.string() + ":" + std::to_string(lines.line_number()) + " bad instant");
    r.start = *start;
    r.end = *end;
    r.kind = parse_event_kind(fields[col["kind"]]);
    if (!fields[col["component"]].empty()) r.component = fields[col["component"]];
    if (!fields[col["failure_mode"]].empty()) r.failure_mode = fields[col["failure_mode"]];
    if (has_note) r.note = fields[col["note"]];
    records.push_back(std::move(r));
  }
  return make_event_log(std::move(records));
}

inline void write_event_log(const EventLog& log, const std::filesystem::path& path) {
  std::string out = "start,end,kind,component,failure_mode,note\n";
  for (const auto& r : log.records) {
    append_int(out, r.start);
    out.push_back(',');
    append_int(out, r.end);
    out += ',';
    out += to_string(r.kind);
    out += ',';
    out += csv_escape(r.component.value_or(""));
    out += ',';
    out += csv_escape(r.failure_mode.value_or(""));
    out += ',';
    out += csv_escape(r.note);
    out += '\n';
  }
  write_file(path, out);
}

// --- categorical encoding ----------------------------------------------------

struct CategoricalEncoding {
  enum class Mode { ordinal, one_hot };

  std::string column;
  std::map<std::string, int> mapping;  // category -> code, codes contiguous from 0
  Mode mode = Mode::ordinal;
};

/// Replaces a categorical column by its integer codes (ordinal) or by one
/// indicator column per category named "<column>=<category>" (one-hot).
/// Indicator columns are registered on the frame so scalers leave them alone.
inline SensorFrame encode_categorical(const SensorFrame& frame, const CategoricalEncoding& spec) {
  if (!frame.has_categorical(spec.column)) throw Error(Errc::ColumnNotFound, spec.column);
  std::vector<std::string> by_code(spec.mapping.size());
  for (const auto& [category, code] : spec.mapping) {
    if (code < 0 || static_cast<std::size_t>(code) >= by_code.size() || !by_code[code].empty())
      throw Error(Errc::InvalidArgument, "codes for " + spec.column + " must be unique and contiguous from 0");
    by_code[code] = category;
  }
  const auto& raw = frame.categorical_column(spec.column).values;
  std::vector<int> codes(raw.size(), -1);
  for (std::size_t r = 0; r < raw.size(); ++r) {
    if (raw[r].empty()) continue;
    auto it = spec.mapping.find(raw[r]);
    if (it == spec.mapping.end()) throw Error(Errc::UnmappedCategory, raw[r]);
    codes[r] = it->second;
  }

  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  if (spec.mode == CategoricalEncoding::Mode::ordinal) {
    names.push_back(spec.column);
    columns.emplace_back(raw.size());
    for (std::size_t r = 0; r < raw.size(); ++r) columns[0][r] = codes[r] < 0 ? kMissing : codes[r];
  } else {
    for (std::size_t k = 0; k < by_code.size(); ++k) {
      names.push_back(spec.column + "=" + by_code[k]);
      std::vector<double> indicator(raw.size());
      for (std::size_t r = 0; r < raw.size(); ++r)
        indicator[r] = codes[r] < 0 ? kMissing : (codes[r] == static_cast<int>(k) ? 1.0 : 0.0);
      columns.push_back(std::move(indicator));
    }
  }
  SensorFrame out = frame.replace_categorical(spec.column, names, columns);
  if (spec.mode == CategoricalEncoding::Mode::one_hot)
    for (const auto& n : names) out.mark_indicator(n);
  return out;
}

}  // namespace phmprep

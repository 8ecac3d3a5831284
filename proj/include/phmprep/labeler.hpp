#pragma once

// Health-state labeling from the maintenance log.
//
// An operational interval runs from the end of one event to the start of the
// next. Inside an interval terminated by a failure at t_f, rows in
// [t_f - degraded_window, t_f) are degraded and rows in
// [t_f - degraded_window - transition_window, t_f - degraded_window) are
// transition. Rows inside events, rows where the operation signal is not
// above its threshold, and the first `warmup` / last `cooldown` seconds next
// to an event are excluded. Precedence: excluded > degraded > transition > healthy.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/frame.hpp"
#include "phmprep/ingest.hpp"

namespace phmprep {

struct ComponentSpec {
  std::string id;
  std::vector<std::string> sensors;
  std::vector<std::string> failure_modes;
};

struct SystemModel {
  std::string id;
  std::vector<ComponentSpec> components;
};

/// Checks component ids are unique, failure modes unique per component and
/// every sensor exists in the frame.
inline void validate_system_model(const SystemModel& model, const SensorFrame& frame) {
  std::set<std::string> ids;
  for (const auto& c : model.components) {
    if (!ids.insert(c.id).second) throw Error(Errc::InvalidArgument, "duplicate component " + c.id);
    std::set<std::string> modes(c.failure_modes.begin(), c.failure_modes.end());
    if (modes.size() != c.failure_modes.size()) throw Error(Errc::InvalidArgument, "duplicate failure mode in " + c.id);
    for (const auto& s : c.sensors)
      if (!frame.find(s)) throw Error(Errc::UnknownFeature, s);
  }
}

struct LabelWindows {
  Duration degraded = 2 * 3600;
  Duration transition = 3 * 3600;
};

/// Rows count as operating only when the signal is strictly above the threshold.
struct OperationSignal {
  std::string feature;
  double threshold = 0.0;
};

struct LabelingConfig {
  LabelWindows windows;
  Duration warmup = 30 * 60;
  Duration cooldown = 30 * 60;
  std::optional<OperationSignal> operation_signal;
  std::map<std::string, LabelWindows> per_mode;  // failure mode -> windows

  const LabelWindows& windows_for(const std::optional<std::string>& mode) const {
    if (mode) {
      auto it = per_mode.find(*mode);
      if (it != per_mode.end()) return it->second;
    }
    return windows;
  }

  void validate() const {
    auto bad = [](const LabelWindows& w) { return w.degraded < 0 || w.transition < 0; };
    if (bad(windows) || warmup < 0 || cooldown < 0) throw Error(Errc::InvalidArgument, "negative labeling duration");
    for (const auto& [mode, w] : per_mode)
      if (bad(w)) throw Error(Errc::InvalidArgument, "negative window for mode " + mode);
  }
};

/// Half-open [begin, end). `terminating_event` indexes EventLog::records;
/// empty means the interval runs to the end of the data.
struct OperationalInterval {
  Timestamp begin = 0;
  Timestamp end = 0;
  std::optional<std::size_t> terminating_event;
  bool starts_after_event = false;
};

struct OperationalIntervals {
  std::vector<OperationalInterval> intervals;
  std::vector<std::int32_t> interval_of_row;  // -1 while an event is in progress
  std::vector<bool> in_operation;             // inside an interval and signal above threshold
};

inline OperationalIntervals extract_operational_intervals(const EventLog& log, const SensorFrame& frame,
                                                          const LabelingConfig& cfg) {
  if (frame.empty()) throw Error(Errc::EmptyInput, "extract_operational_intervals on an empty frame");
  const auto& ts = frame.timestamps();
  const Timestamp first = ts.front();
  const Timestamp past_last = ts.back() + 1;

  OperationalIntervals out;
  Timestamp cursor = std::numeric_limits<Timestamp>::min();
  bool after_event = false;
  auto emit = [&](Timestamp begin, Timestamp end, std::optional<std::size_t> cause) {
    if (begin >= end || end <= first || begin >= past_last) return;
    out.intervals.push_back({begin, end, cause, after_event});
  };
  for (std::size_t e = 0; e < log.records.size(); ++e) {
    const auto& rec = log.records[e];
    if (rec.start > cursor) emit(cursor, rec.start, e);
    if (rec.end > cursor) {
      cursor = rec.end;
      after_event = true;
    }
  }
  emit(cursor, std::max(past_last, cursor), std::nullopt);
  for (auto& iv : out.intervals)
    if (!iv.starts_after_event) iv.begin = std::max(iv.begin, first);

  out.interval_of_row.assign(frame.rows(), -1);
  out.in_operation.assign(frame.rows(), false);
  for (std::size_t k = 0; k < out.intervals.size(); ++k) {
    const auto& iv = out.intervals[k];
    auto lo = std::lower_bound(ts.begin(), ts.end(), iv.begin);
    auto hi = std::lower_bound(ts.begin(), ts.end(), iv.end);
    for (auto it = lo; it != hi; ++it) {
      const auto r = static_cast<std::size_t>(it - ts.begin());
      out.interval_of_row[r] = static_cast<std::int32_t>(k);
      out.in_operation[r] = true;
    }
  }
  if (cfg.operation_signal) {
    const std::size_t col = frame.index_of(cfg.operation_signal->feature);
    for (std::size_t r = 0; r < frame.rows(); ++r) {
      const double v = frame.at(r, col);
      if (is_missing(v) || !(v > cfg.operation_signal->threshold)) out.in_operation[r] = false;
    }
  }
  return out;
}

enum class HealthState : std::uint8_t { healthy, transition, degraded, excluded };

inline const char* to_string(HealthState s) {
  switch (s) {
    case HealthState::healthy: return "healthy";
    case HealthState::transition: return "transition";
    case HealthState::degraded: return "degraded";
    case HealthState::excluded: return "excluded";
  }
  return "?";
}

/// One row's label. `event` is the terminating event of the row's interval
/// (the provenance); -1 for rows outside any interval or at end of data.
struct Label {
  HealthState state = HealthState::excluded;
  std::int32_t event = -1;

  friend bool operator==(const Label&, const Label&) = default;
};

struct LabelSequence {
  std::vector<Label> labels;

  std::size_t count(HealthState s) const {
    return static_cast<std::size_t>(
        std::count_if(labels.begin(), labels.end(), [&](const Label& l) { return l.state == s; }));
  }
};

inline LabelSequence generate_labels(const OperationalIntervals& intervals, const EventLog& log,
                                     const LabelingConfig& cfg, const SensorFrame& frame) {
  cfg.validate();
  if (intervals.interval_of_row.size() != frame.rows())
    throw Error(Errc::LengthMismatch, "intervals were extracted from a different frame");
  const auto& ts = frame.timestamps();
  LabelSequence seq;
  seq.labels.assign(frame.rows(), Label{});
  for (const auto& iv : intervals.intervals) {
    auto lo = std::lower_bound(ts.begin(), ts.end(), iv.begin);
    auto hi = std::lower_bound(ts.begin(), ts.end(), iv.end);
    const Timestamp usable_from = iv.starts_after_event ? iv.begin + cfg.warmup : iv.begin;
    const Timestamp usable_to = iv.terminating_event ? iv.end - cfg.cooldown : iv.end;

    std::optional<Timestamp> degraded_from, transition_from;
    std::int32_t event = -1;
    if (iv.terminating_event) {
      event = static_cast<std::int32_t>(*iv.terminating_event);
      const auto& rec = log.records[*iv.terminating_event];
      if (rec.kind == EventKind::failure) {
        const auto& w = cfg.windows_for(rec.failure_mode);
        degraded_from = rec.start - w.degraded;
        transition_from = *degraded_from - w.transition;
      }
    }
    for (auto it = lo; it != hi; ++it) {
      const auto r = static_cast<std::size_t>(it - ts.begin());
      const Timestamp t = *it;
      Label& label = seq.labels[r];
      label.event = event;
      if (!intervals.in_operation[r] || t < usable_from || t >= usable_to) {
        label.state = HealthState::excluded;
      } else if (degraded_from && t >= *degraded_from) {
        label.state = HealthState::degraded;
      } else if (transition_from && t >= *transition_from) {
        label.state = HealthState::transition;
      } else {
        label.state = HealthState::healthy;
      }
    }
  }
  return seq;
}

/// extract_operational_intervals followed by generate_labels.
inline LabelSequence label_frame(const EventLog& log, const SensorFrame& frame, const LabelingConfig& cfg) {
  return generate_labels(extract_operational_intervals(log, frame, cfg), log, cfg, frame);
}

/// Key used for degraded partitions: the failure mode, or "unspecified".
inline std::string degraded_key(const EventLog& log, const Label& label) {
  if (label.event < 0) return "unspecified";
  const auto& rec = log.records[static_cast<std::size_t>(label.event)];
  return rec.failure_mode.value_or("unspecified");
}

struct StatePartition {
  SensorFrame healthy;
  std::map<std::string, SensorFrame> degraded;  // by failure mode
  SensorFrame transition;
  std::size_t excluded_rows = 0;
};

inline StatePartition partition_by_state(const SensorFrame& frame, const LabelSequence& labels, const EventLog& log) {
  if (labels.labels.size() != frame.rows())
    throw Error(Errc::LengthMismatch, std::to_string(labels.labels.size()) + " labels for " +
                                          std::to_string(frame.rows()) + " rows");
  std::vector<std::size_t> healthy, transition;
  std::map<std::string, std::vector<std::size_t>> degraded;
  StatePartition out;
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    const Label& l = labels.labels[r];
    switch (l.state) {
      case HealthState::healthy: healthy.push_back(r); break;
      case HealthState::transition: transition.push_back(r); break;
      case HealthState::degraded: degraded[degraded_key(log, l)].push_back(r); break;
      case HealthState::excluded: ++out.excluded_rows; break;
    }
  }
  out.healthy = frame.select_rows(healthy);
  out.transition = frame.select_rows(transition);
  for (const auto& [mode, rows] : degraded) out.degraded.emplace(mode, frame.select_rows(rows));
  return out;
}

}  // namespace phmprep

#pragma once

// Seeded generator of machinery scenarios with known ground truth: correlated
// sensor clusters, near-constant channels, dead channels, communication
// bursts, outlier spikes and an event schedule whose failures are preceded by
// a mean shift on the sensors tied to the failure mode.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "phmprep/core/error.hpp"
#include "phmprep/core/frame.hpp"
#include "phmprep/core/random.hpp"
#include "phmprep/core/text.hpp"
#include "phmprep/ingest.hpp"
#include "phmprep/labeler.hpp"
#include "phmprep/outlier.hpp"

namespace phmprep {

enum class SignalKind { drift, periodic, stationary };

inline const char* to_string(SignalKind k) {
  switch (k) {
    case SignalKind::drift: return "drift";
    case SignalKind::periodic: return "periodic";
    case SignalKind::stationary: return "stationary";
  }
  return "?";
}

inline SignalKind parse_signal_kind(const std::string& s) {
  if (s == "drift") return SignalKind::drift;
  if (s == "periodic") return SignalKind::periodic;
  if (s == "stationary") return SignalKind::stationary;
  throw Error(Errc::InvalidConfig, "unknown signal kind " + s);
}

struct ClusterSpec {
  std::size_t size = 3;
  SignalKind kind = SignalKind::stationary;
  double correlation = 0.98;
};

struct MissingSpec {
  std::vector<std::string> kill;  // channels that go dark
  double kill_from = 0.4;         // fraction of the duration after which killed channels are empty
  double cell_rate = 0.0005;
  std::size_t bursts = 10;  // communication losses blanking every channel
  std::size_t burst_rows = 5;
};

struct OutlierSpec {
  double rate = 0.0002;    // per cell
  double magnitude = 3.0;  // distance beyond the nominal bound, in sigma units
};

/// One event placed `gap` seconds after the previous one ended.
struct ScheduledEvent {
  Duration gap = 0;
  Duration length = 0;
  EventKind kind = EventKind::normal_stop;
  std::string component;
  std::string mode;
};

struct ScheduleSpec {
  std::size_t failures = 12;
  std::vector<std::string> modes{"FM1", "FM2"};
  std::string component = "C1";
  std::size_t normal_stops = 16;
  std::size_t pauses = 10;
  Duration failure_length = 8 * 3600;
  Duration stop_length = 4 * 3600;
  Duration pause_length = 3600;
  Duration min_gap = 12 * 3600;
};

struct DegradationSpec {
  std::map<std::string, std::vector<std::string>> affected;  // mode -> sensors
  Duration degraded_window = 2 * 3600;
  Duration transition_window = 6 * 3600;  // linear ramp up to the full shift
  double mean_shift = 2.0;                // sigma units
  double variance_inflation = 1.0;
};

struct SynthConfig {
  double duration_hours = 2000.0;
  Duration sampling_period = 60;
  Timestamp epoch = 1556668800;  // 2019-05-01T00:00:00Z
  std::vector<ClusterSpec> clusters;
  std::size_t n_independent = 32;
  std::size_t n_constant = 2;
  std::size_t n_unrelated = 3;
  double noise_floor = 0.05;  // smallest independent noise share (sd units) a channel can carry
  Duration warmup_ramp = 20 * 60;
  double warmup_depth = 2.0;
  MissingSpec missing;
  OutlierSpec outliers;
  ScheduleSpec schedule_spec;
  std::vector<ScheduledEvent> schedule;  // explicit schedule; generated from schedule_spec when empty
  DegradationSpec degradation;
  int decimals = 4;
  std::uint64_t seed = 42;

  std::size_t rows() const {
    return static_cast<std::size_t>(std::llround(duration_hours * 3600.0 / static_cast<double>(sampling_period)));
  }
};

/// 50 channels, 2 000 h at 60 s, 12 failures across 2 modes.
inline SynthConfig default_synth_config(std::uint64_t seed = 42) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.clusters = {{3, SignalKind::stationary, 0.98},
                  {3, SignalKind::periodic, 0.98},
                  {3, SignalKind::drift, 0.98},
                  {3, SignalKind::stationary, 0.98}};
  cfg.missing.kill = {"ind_30", "ind_31", "ind_32"};
  cfg.degradation.affected = {{"FM1", {"ind_01", "ind_02", "ind_03", "ind_04"}},
                              {"FM2", {"ind_05", "ind_06", "ind_07", "ind_08"}}};
  return cfg;
}

inline constexpr const char* kMotorChannel = "motor_current";

struct OutlierCell {
  std::size_t row = 0;
  std::string feature;
  double value = 0.0;
};

struct DegradationOnset {
  std::size_t event = 0;  // index into the event log
  std::string mode;
  Timestamp failure = 0;
  Timestamp onset = 0;       // failure - degraded window
  Timestamp ramp_start = 0;  // onset - transition window
};

struct GroundTruth {
  std::vector<std::vector<std::string>> clusters;
  std::vector<double> cluster_correlation;
  std::vector<std::string> constant_channels;
  std::vector<std::string> unrelated_channels;
  std::vector<std::string> dead_channels;
  std::map<std::string, std::vector<std::string>> affected;
  std::string operation_signal = kMotorChannel;
  CutoffSpec nominal_bounds;
  std::map<std::string, std::pair<double, double>> nominal_moments;  // mean, sd
  std::vector<OutlierCell> outliers;
  std::vector<std::size_t> burst_rows;
  std::vector<DegradationOnset> onsets;
  std::vector<HealthState> states;  // per row; excluded while stopped
  double mean_shift = 0.0;

  std::set<std::size_t> outlier_rows() const {
    std::set<std::size_t> out;
    for (const auto& c : outliers) out.insert(c.row);
    return out;
  }
};

struct Scenario {
  SensorFrame frame;
  EventLog log;
  GroundTruth truth;
};

/// Lays out a generated schedule: failures, stops and pauses in seeded order,
/// with the spare operating time split into seeded gaps on the sampling grid.
inline std::vector<ScheduledEvent> generate_schedule(const SynthConfig& cfg) {
  const auto& s = cfg.schedule_spec;
  std::vector<ScheduledEvent> events;
  for (std::size_t i = 0; i < s.failures; ++i) {
    if (s.modes.empty()) throw Error(Errc::InvalidConfig, "failures requested without failure modes");
    events.push_back({0, s.failure_length, EventKind::failure, s.component, s.modes[i % s.modes.size()]});
  }
  for (std::size_t i = 0; i < s.normal_stops; ++i) events.push_back({0, s.stop_length, EventKind::normal_stop, "", ""});
  for (std::size_t i = 0; i < s.pauses; ++i) events.push_back({0, s.pause_length, EventKind::pause, "", ""});
  Rng rng(derive_seed(cfg.seed, "synth.schedule"));
  rng.shuffle(events);

  const Duration period = cfg.sampling_period;
  const Duration total = static_cast<Duration>(cfg.rows()) * period;
  Duration busy = 0;
  for (const auto& e : events) busy += e.length + s.min_gap;
  // one extra gap after the last event keeps data beyond the final record
  const Duration spare = total - busy - s.min_gap;
  if (spare < 0) throw Error(Errc::ScheduleOverflow, "events and minimum gaps exceed the duration");
  std::vector<double> weights(events.size() + 1);
  double sum = 0.0;
  for (double& w : weights) sum += (w = rng.uniform(0.5, 1.5));
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto extra = static_cast<Duration>(std::floor(static_cast<double>(spare) * weights[i] / sum));
    events[i].gap = s.min_gap + extra / period * period;
  }
  return events;
}

namespace detail {

inline void check_grid(Duration d, Duration period, const char* what) {
  if (d < 0 || d % period != 0)
    throw Error(Errc::InvalidConfig, std::string(what) + " must be a non-negative multiple of the sampling period");
}

inline void validate(const SynthConfig& cfg, const std::set<std::string>& channels) {
  if (cfg.sampling_period <= 0) throw Error(Errc::InvalidConfig, "sampling period must be positive");
  if (cfg.rows() < 2) throw Error(Errc::InvalidConfig, "duration too short for two samples");
  auto rate = [](double r, const char* what) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error(Errc::InvalidConfig, std::string(what) + " must lie in [0, 1]");
  };
  rate(cfg.missing.cell_rate, "missing cell rate");
  rate(cfg.missing.kill_from, "kill_from");
  rate(cfg.outliers.rate, "outlier rate");
  if (!(cfg.outliers.magnitude > 0.0)) throw Error(Errc::InvalidConfig, "outlier magnitude must be positive");
  if (!(cfg.degradation.variance_inflation > 0.0)) throw Error(Errc::InvalidConfig, "variance inflation must be positive");
  check_grid(cfg.degradation.degraded_window, cfg.sampling_period, "degraded window");
  check_grid(cfg.degradation.transition_window, cfg.sampling_period, "transition window");
  for (const auto& e : cfg.schedule) {
    check_grid(e.gap, cfg.sampling_period, "event gap");
    check_grid(e.length, cfg.sampling_period, "event length");
    if (e.length == 0) throw Error(Errc::InvalidConfig, "event length must be positive");
  }
  for (const auto& name : cfg.missing.kill)
    if (!channels.count(name)) throw Error(Errc::UnknownFeature, "kill list: " + name);
  for (const auto& [mode, sensors] : cfg.degradation.affected)
    for (const auto& name : sensors)
      if (!channels.count(name) || name == kMotorChannel) throw Error(Errc::UnknownFeature, mode + ": " + name);
  for (const auto& c : cfg.clusters) {
    if (c.size < 2) throw Error(Errc::InvalidConfig, "clusters need at least two channels");
    if (!(c.correlation > 0.0 && c.correlation < 1.0) || std::sqrt(1.0 - c.correlation) < cfg.noise_floor)
      throw Error(Errc::InfeasibleCorrelation, "target " + format_double(c.correlation) + " with noise floor " +
                                                   format_double(cfg.noise_floor));
  }
}

inline std::string numbered(const char* prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return std::string(prefix) + digits;
}

/// Zero-mean, unit-variance version of a series (sample moments).
inline void standardize(std::vector<double>& v) {
  const double m = mean_of(v);
  const double s = population_std(v, m);
  for (double& x : v) x = s > 0.0 ? (x - m) / s : 0.0;
}

inline std::vector<double> latent_series(SignalKind kind, std::size_t n, Duration period, Rng& rng) {
  std::vector<double> v(n);
  double state = 0.0;
  switch (kind) {
    case SignalKind::stationary:
      for (double& x : v) x = state = 0.9 * state + rng.normal();
      break;
    case SignalKind::periodic: {
      const double day = 86400.0 / static_cast<double>(period);
      for (std::size_t i = 0; i < n; ++i) {
        state = 0.8 * state + 0.3 * rng.normal();
        v[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / day) + state;
      }
      break;
    }
    case SignalKind::drift: {
      double walk = 0.0;
      for (double& x : v) {
        walk += 0.02 * rng.normal();
        state = 0.7 * state + 0.3 * rng.normal();
        x = walk + state;
      }
      break;
    }
  }
  standardize(v);
  return v;
}

/// Unit-variance AR(1) noise.
inline std::vector<double> ar_noise(std::size_t n, double phi, Rng& rng) {
  std::vector<double> v(n);
  const double innovation = std::sqrt(1.0 - phi * phi);
  double state = rng.normal();
  for (double& x : v) x = state = phi * state + innovation * rng.normal();
  return v;
}

}  // namespace detail

/// Deterministic for a fixed config. Channels carry z-scores clamped to
/// [-5.5, 5.5] around their mean, so the nominal bounds mean +/- 6 sd hold
/// every non-injected cell and every injected outlier lies beyond them.
inline Scenario generate_scenario(const SynthConfig& input) {
  SynthConfig cfg = input;
  const std::size_t n = cfg.rows();
  const Duration period = cfg.sampling_period;

  // channel layout
  std::vector<std::string> names{kMotorChannel};
  GroundTruth truth;
  for (std::size_t k = 0; k < cfg.clusters.size(); ++k) {
    truth.clusters.emplace_back();
    truth.cluster_correlation.push_back(cfg.clusters[k].correlation);
    for (std::size_t j = 0; j < cfg.clusters[k].size; ++j) {
      names.push_back("clu" + std::to_string(k + 1) + "_" + std::to_string(j + 1));
      truth.clusters.back().push_back(names.back());
    }
  }
  for (std::size_t i = 0; i < cfg.n_independent; ++i) names.push_back(detail::numbered("ind_", i + 1, 2));
  for (std::size_t i = 0; i < cfg.n_constant; ++i) {
    names.push_back("const_" + std::to_string(i + 1));
    truth.constant_channels.push_back(names.back());
  }
  for (std::size_t i = 0; i < cfg.n_unrelated; ++i) {
    names.push_back("unrel_" + std::to_string(i + 1));
    truth.unrelated_channels.push_back(names.back());
  }
  const std::set<std::string> channel_set(names.begin(), names.end());
  detail::validate(cfg, channel_set);
  truth.dead_channels = cfg.missing.kill;
  truth.affected = cfg.degradation.affected;
  truth.mean_shift = cfg.degradation.mean_shift;

  // schedule and event log
  if (cfg.schedule.empty()) cfg.schedule = generate_schedule(cfg);
  std::vector<Timestamp> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = cfg.epoch + static_cast<Timestamp>(i) * period;
  const Timestamp data_end = cfg.epoch + static_cast<Timestamp>(n) * period;
  std::vector<EventRecord> records;
  Timestamp cursor = cfg.epoch;
  for (const auto& e : cfg.schedule) {
    EventRecord r;
    r.start = cursor + e.gap;
    r.end = r.start + e.length;
    r.kind = e.kind;
    if (e.kind == EventKind::failure) {
      r.component = e.component.empty() ? std::string("C1") : e.component;
      r.failure_mode = e.mode;
      r.note = "failure " + e.mode;
    } else {
      r.note = e.kind == EventKind::pause ? "operator pause" : "planned stop";
    }
    if (r.end > data_end) throw Error(Errc::ScheduleOverflow, "event at offset " + std::to_string(r.start - cfg.epoch));
    cursor = r.end;
    records.push_back(std::move(r));
  }
  EventLog log = make_event_log(std::move(records));

  // per-row context: stopped flag, seconds since the last event ended, degradation level per mode
  std::vector<bool> stopped(n, false);
  std::vector<double> warm(n, 0.0);  // 1 right after start-up, decaying to 0 over the ramp
  std::map<std::string, std::vector<double>> level;
  for (const auto& [mode, sensors] : cfg.degradation.affected) level[mode].assign(n, 0.0);
  std::map<std::string, std::vector<bool>> in_degraded;
  for (const auto& [mode, sensors] : cfg.degradation.affected) in_degraded[mode].assign(n, false);
  truth.states.assign(n, HealthState::healthy);
  auto row_of = [&](Timestamp t) {
    return static_cast<std::size_t>(std::clamp<Timestamp>((t - cfg.epoch + period - 1) / period, 0,
                                                          static_cast<Timestamp>(n)));
  };
  for (std::size_t e = 0; e < log.records.size(); ++e) {
    const auto& rec = log.records[e];
    for (std::size_t r = row_of(rec.start); r < row_of(rec.end); ++r) stopped[r] = true;
    for (std::size_t r = row_of(rec.end); r < row_of(rec.end + cfg.warmup_ramp); ++r)
      warm[r] = 1.0 - static_cast<double>(ts[r] - rec.end) / static_cast<double>(cfg.warmup_ramp);
    if (rec.kind != EventKind::failure) continue;
    DegradationOnset onset;
    onset.event = e;
    onset.mode = *rec.failure_mode;
    onset.failure = rec.start;
    onset.onset = rec.start - cfg.degradation.degraded_window;
    onset.ramp_start = onset.onset - cfg.degradation.transition_window;
    truth.onsets.push_back(onset);
    for (std::size_t r = row_of(onset.ramp_start); r < row_of(onset.onset); ++r)
      if (truth.states[r] == HealthState::healthy) truth.states[r] = HealthState::transition;
    for (std::size_t r = row_of(onset.onset); r < row_of(onset.failure); ++r) truth.states[r] = HealthState::degraded;
    auto lv = level.find(onset.mode);
    if (lv == level.end()) continue;
    for (std::size_t r = row_of(onset.ramp_start); r < row_of(onset.failure); ++r) {
      const double ramp = cfg.degradation.transition_window > 0
                              ? static_cast<double>(ts[r] - onset.ramp_start) /
                                    static_cast<double>(cfg.degradation.transition_window)
                              : 1.0;
      lv->second[r] = std::max(lv->second[r], std::min(1.0, ramp));
    }
    for (std::size_t r = row_of(onset.onset); r < row_of(onset.failure); ++r) in_degraded[onset.mode][r] = true;
  }
  for (std::size_t r = 0; r < n; ++r)
    if (stopped[r]) truth.states[r] = HealthState::excluded;

  std::map<std::string, std::vector<std::string>> modes_of;  // sensor -> modes affecting it
  for (const auto& [mode, sensors] : cfg.degradation.affected)
    for (const auto& s : sensors) modes_of[s].push_back(mode);

  // channel synthesis
  const double scale = std::pow(10.0, cfg.decimals);
  auto quantize = [&](double v) { return std::round(v * scale) / scale; };
  std::vector<double> values(n * names.size());
  auto put = [&](std::size_t col, std::size_t r, double v) { values[r * names.size() + col] = v; };

  auto emit_channel = [&](std::size_t col, const std::vector<double>& z0, double mean, double sd, double sign,
                          bool warms) {
    const std::string& name = names[col];
    const auto affected = modes_of.find(name);
    for (std::size_t r = 0; r < n; ++r) {
      double z = z0[r];
      if (affected != modes_of.end()) {
        double shift = 0.0;
        bool inflate = false;
        for (const auto& mode : affected->second) {
          shift = std::max(shift, level[mode][r]);
          inflate = inflate || in_degraded[mode][r];
        }
        if (inflate) z *= cfg.degradation.variance_inflation;
        z += shift * cfg.degradation.mean_shift;
      }
      if (warms && !stopped[r]) z -= cfg.warmup_depth * warm[r];
      z = std::clamp(z, -5.5, 5.5);
      put(col, r, quantize(mean + sign * sd * z));
    }
    truth.nominal_bounds[name] = Bounds{mean - 6.0 * sd, mean + 6.0 * sd};
    truth.nominal_moments[name] = {mean, sd};
  };

  Rng layout(derive_seed(cfg.seed, "synth.layout"));
  std::size_t col = 1;
  {
    Rng rng(derive_seed(cfg.seed, "synth.channel.motor_current"));
    const double mean = 40.0, sd = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = std::clamp(mean + sd * rng.normal(), mean - 5.5 * sd, mean + 5.5 * sd);
      put(0, r, stopped[r] ? 0.0 : quantize(v * (1.0 - 0.7 * warm[r])));
    }
  }
  for (std::size_t k = 0; k < cfg.clusters.size(); ++k) {
    const auto& spec = cfg.clusters[k];
    Rng latent_rng(derive_seed(cfg.seed, "synth.latent." + std::to_string(k)));
    const auto latent = detail::latent_series(spec.kind, n, period, latent_rng);
    const double loading = std::sqrt(spec.correlation), noise = std::sqrt(1.0 - spec.correlation);
    for (std::size_t j = 0; j < spec.size; ++j, ++col) {
      Rng rng(derive_seed(cfg.seed, "synth.channel." + names[col]));
      std::vector<double> z(n);
      for (std::size_t r = 0; r < n; ++r) z[r] = loading * latent[r] + noise * rng.normal();
      const double mean = layout.uniform(20.0, 80.0);
      const double sd = mean * layout.uniform(0.1, 0.3);
      const double sign = (j == 2 && k % 2 == 0) ? -1.0 : 1.0;  // some members respond inversely
      emit_channel(col, z, mean, sd, sign, true);
    }
  }
  for (std::size_t i = 0; i < cfg.n_independent; ++i, ++col) {
    Rng rng(derive_seed(cfg.seed, "synth.channel." + names[col]));
    const auto z = detail::ar_noise(n, 0.5, rng);
    const double mean = layout.uniform(20.0, 80.0);
    emit_channel(col, z, mean, mean * layout.uniform(0.1, 0.3), 1.0, true);
  }
  for (std::size_t i = 0; i < cfg.n_constant; ++i, ++col) {
    Rng rng(derive_seed(cfg.seed, "synth.channel." + names[col]));
    std::vector<double> z(n);
    for (double& x : z) x = rng.normal();
    const double mean = 5.0 * static_cast<double>(i + 1);
    emit_channel(col, z, mean, mean * 0.002, 1.0, false);
  }
  for (std::size_t i = 0; i < cfg.n_unrelated; ++i, ++col) {
    Rng rng(derive_seed(cfg.seed, "synth.channel." + names[col]));
    const auto z = detail::ar_noise(n, 0.99, rng);
    const double mean = layout.uniform(10.0, 30.0);
    emit_channel(col, z, mean, mean * 0.2, 1.0, false);
  }

  // missing values
  const std::size_t width = names.size();
  Rng miss(derive_seed(cfg.seed, "synth.missing"));
  for (const auto& name : cfg.missing.kill) {
    const auto c = static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
    const auto from = static_cast<std::size_t>(std::floor(cfg.missing.kill_from * static_cast<double>(n)));
    for (std::size_t r = from; r < n; ++r) values[r * width + c] = kMissing;
  }
  if (cfg.missing.cell_rate > 0.0)
    for (double& v : values)
      if (miss.uniform() < cfg.missing.cell_rate) v = kMissing;
  std::set<std::size_t> burst;
  for (std::size_t b = 0; b < cfg.missing.bursts; ++b) {
    const std::size_t start = miss.index(n);
    for (std::size_t r = start; r < std::min(n, start + cfg.missing.burst_rows); ++r) burst.insert(r);
  }
  for (std::size_t r : burst)
    for (std::size_t c = 0; c < width; ++c) values[r * width + c] = kMissing;
  truth.burst_rows.assign(burst.begin(), burst.end());

  // outliers, never on the operation signal
  Rng spikes(derive_seed(cfg.seed, "synth.outliers"));
  if (cfg.outliers.rate > 0.0) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 1; c < width; ++c) {
        if (!(spikes.uniform() < cfg.outliers.rate)) continue;
        double& v = values[r * width + c];
        if (is_missing(v)) continue;
        const auto [mean, sd] = truth.nominal_moments[names[c]];
        const double beyond = cfg.outliers.magnitude * sd * spikes.uniform(0.5, 1.5);
        const bool high = spikes.uniform() < 0.5;
        v = quantize(high ? mean + 6.0 * sd + beyond : mean - 6.0 * sd - beyond);
        truth.outliers.push_back({r, names[c], v});
      }
    }
  }

  SensorFrame frame(std::move(ts), names, std::move(values));
  return {std::move(frame), std::move(log), std::move(truth)};
}

// ---- serialization

inline nlohmann::json to_json(const SynthConfig& cfg) {
  using nlohmann::json;
  json clusters = json::array();
  for (const auto& c : cfg.clusters)
    clusters.push_back({{"size", c.size}, {"kind", to_string(c.kind)}, {"correlation", c.correlation}});
  json schedule = json::array();
  for (const auto& e : cfg.schedule)
    schedule.push_back({{"gap", e.gap}, {"length", e.length}, {"kind", to_string(e.kind)}, {"component", e.component},
                        {"mode", e.mode}});
  const auto& s = cfg.schedule_spec;
  return {{"duration_hours", cfg.duration_hours},
          {"sampling_period", cfg.sampling_period},
          {"epoch", cfg.epoch},
          {"clusters", clusters},
          {"n_independent", cfg.n_independent},
          {"n_constant", cfg.n_constant},
          {"n_unrelated", cfg.n_unrelated},
          {"noise_floor", cfg.noise_floor},
          {"warmup_ramp", cfg.warmup_ramp},
          {"warmup_depth", cfg.warmup_depth},
          {"missing",
           {{"kill", cfg.missing.kill},
            {"kill_from", cfg.missing.kill_from},
            {"cell_rate", cfg.missing.cell_rate},
            {"bursts", cfg.missing.bursts},
            {"burst_rows", cfg.missing.burst_rows}}},
          {"outliers", {{"rate", cfg.outliers.rate}, {"magnitude", cfg.outliers.magnitude}}},
          {"schedule_spec",
           {{"failures", s.failures},
            {"modes", s.modes},
            {"component", s.component},
            {"normal_stops", s.normal_stops},
            {"pauses", s.pauses},
            {"failure_length", s.failure_length},
            {"stop_length", s.stop_length},
            {"pause_length", s.pause_length},
            {"min_gap", s.min_gap}}},
          {"schedule", schedule},
          {"degradation",
           {{"affected", cfg.degradation.affected},
            {"degraded_window", cfg.degradation.degraded_window},
            {"transition_window", cfg.degradation.transition_window},
            {"mean_shift", cfg.degradation.mean_shift},
            {"variance_inflation", cfg.degradation.variance_inflation}}},
          {"decimals", cfg.decimals},
          {"seed", cfg.seed}};
}

/// Absent keys keep the defaults of default_synth_config.
inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig cfg = default_synth_config();
  try {
    auto get = [&](const nlohmann::json& obj, const char* key, auto& dst) {
      if (obj.contains(key)) obj.at(key).get_to(dst);
    };
    get(j, "duration_hours", cfg.duration_hours);
    get(j, "sampling_period", cfg.sampling_period);
    get(j, "epoch", cfg.epoch);
    if (j.contains("clusters")) {
      cfg.clusters.clear();
      for (const auto& c : j.at("clusters"))
        cfg.clusters.push_back({c.value("size", std::size_t{3}), parse_signal_kind(c.value("kind", "stationary")),
                                c.value("correlation", 0.98)});
    }
    get(j, "n_independent", cfg.n_independent);
    get(j, "n_constant", cfg.n_constant);
    get(j, "n_unrelated", cfg.n_unrelated);
    get(j, "noise_floor", cfg.noise_floor);
    get(j, "warmup_ramp", cfg.warmup_ramp);
    get(j, "warmup_depth", cfg.warmup_depth);
    if (j.contains("missing")) {
      const auto& m = j.at("missing");
      get(m, "kill", cfg.missing.kill);
      get(m, "kill_from", cfg.missing.kill_from);
      get(m, "cell_rate", cfg.missing.cell_rate);
      get(m, "bursts", cfg.missing.bursts);
      get(m, "burst_rows", cfg.missing.burst_rows);
    }
    if (j.contains("outliers")) {
      get(j.at("outliers"), "rate", cfg.outliers.rate);
      get(j.at("outliers"), "magnitude", cfg.outliers.magnitude);
    }
    if (j.contains("schedule_spec")) {
      const auto& s = j.at("schedule_spec");
      auto& d = cfg.schedule_spec;
      get(s, "failures", d.failures);
      get(s, "modes", d.modes);
      get(s, "component", d.component);
      get(s, "normal_stops", d.normal_stops);
      get(s, "pauses", d.pauses);
      get(s, "failure_length", d.failure_length);
      get(s, "stop_length", d.stop_length);
      get(s, "pause_length", d.pause_length);
      get(s, "min_gap", d.min_gap);
    }
    if (j.contains("schedule")) {
      cfg.schedule.clear();
      for (const auto& e : j.at("schedule"))
        cfg.schedule.push_back({e.at("gap").get<Duration>(), e.at("length").get<Duration>(),
                                parse_event_kind(e.at("kind").get<std::string>()), e.value("component", ""),
                                e.value("mode", "")});
    }
    if (j.contains("degradation")) {
      const auto& d = j.at("degradation");
      get(d, "affected", cfg.degradation.affected);
      get(d, "degraded_window", cfg.degradation.degraded_window);
      get(d, "transition_window", cfg.degradation.transition_window);
      get(d, "mean_shift", cfg.degradation.mean_shift);
      get(d, "variance_inflation", cfg.degradation.variance_inflation);
    }
    get(j, "decimals", cfg.decimals);
    get(j, "seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
  return cfg;
}

inline nlohmann::json to_json(const GroundTruth& truth, const SensorFrame& frame) {
  using nlohmann::json;
  json bounds = json::object();
  for (const auto& [name, b] : truth.nominal_bounds) bounds[name] = {{"lower", *b.lower}, {"upper", *b.upper}};
  json outliers = json::array();
  for (const auto& o : truth.outliers)
    outliers.push_back({{"row", o.row}, {"timestamp", frame.timestamps()[o.row]}, {"feature", o.feature},
                        {"value", o.value}});
  json onsets = json::array();
  for (const auto& o : truth.onsets)
    onsets.push_back({{"event", o.event}, {"mode", o.mode}, {"failure", o.failure}, {"onset", o.onset},
                      {"ramp_start", o.ramp_start}});
  // run-length encoded states over row timestamps, [begin, end)
  json segments = json::array();
  const auto& ts = frame.timestamps();
  for (std::size_t r = 0; r < truth.states.size();) {
    std::size_t e = r;
    while (e < truth.states.size() && truth.states[e] == truth.states[r]) ++e;
    const Timestamp end = e < ts.size() ? ts[e] : ts.back() + 1;
    segments.push_back({{"begin", ts[r]}, {"end", end}, {"state", to_string(truth.states[r])}});
    r = e;
  }
  std::vector<Timestamp> burst_ts;
  for (std::size_t r : truth.burst_rows) burst_ts.push_back(ts[r]);
  return {{"clusters", truth.clusters},
          {"cluster_correlation", truth.cluster_correlation},
          {"constant_channels", truth.constant_channels},
          {"unrelated_channels", truth.unrelated_channels},
          {"dead_channels", truth.dead_channels},
          {"affected", truth.affected},
          {"operation_signal", truth.operation_signal},
          {"mean_shift", truth.mean_shift},
          {"nominal_bounds", bounds},
          {"outliers", outliers},
          {"burst_timestamps", burst_ts},
          {"degradation_onsets", onsets},
          {"states", segments}};
}

}  // namespace phmprep

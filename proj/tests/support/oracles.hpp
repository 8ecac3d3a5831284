#pragma once

// Brute-force reference implementations. Deliberately naive and written
// against the definitions, not against the library code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "phmprep/core/frame.hpp"
#include "phmprep/ingest.hpp"
#include "phmprep/labeler.hpp"
#include "phmprep/models/network.hpp"

namespace oracle {

using phmprep::Duration;
using phmprep::Timestamp;

inline long double mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return s / static_cast<long double>(v.size());
}

inline long double population_std(const std::vector<double>& v) {
  const long double m = mean(v);
  long double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<long double>(v.size()));
}

inline std::optional<double> cv(const std::vector<double>& v) {
  const long double m = mean(v);
  if (m == 0) return std::nullopt;
  return static_cast<double>(population_std(v) / m);
}

/// Pearson r from the textbook sums over pairs where both sides are present.
inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> a, b;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isnan(x[i]) && !std::isnan(y[i])) {
      a.push_back(x[i]);
      b.push_back(y[i]);
    }
  if (a.size() < 2) return std::nullopt;
  const long double ma = mean(a), mb = mean(b);
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return std::nullopt;
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

/// Quantile by linear interpolation at rank (n - 1) p, located by counting how
/// many values lie below each candidate instead of sorting.
inline double quantile(const std::vector<double>& v, double p) {
  auto kth = [&](std::size_t k) {
    for (double c : v) {
      std::size_t below = 0, equal = 0;
      for (double o : v) {
        below += o < c;
        equal += o == c;
      }
      if (below <= k && k < below + equal) return c;
    }
    return v.front();
  };
  const long double h = static_cast<long double>(v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return kth(v.size() - 1);
  const double a = kth(lo), b = kth(lo + 1);
  return static_cast<double>(a + (h - static_cast<long double>(lo)) * (b - a));
}

/// Labels every timestamp independently by scanning the whole event log.
inline std::vector<phmprep::HealthState> labels(const phmprep::EventLog& log, const phmprep::SensorFrame& frame,
                                                const phmprep::LabelingConfig& cfg) {
  using phmprep::HealthState;
  std::optional<std::size_t> op;
  if (cfg.operation_signal) op = frame.index_of(cfg.operation_signal->feature);
  std::vector<HealthState> out;
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    const Timestamp t = frame.timestamps()[r];
    bool down = false;
    std::optional<std::size_t> next;
    std::optional<Timestamp> last_end;
    for (std::size_t e = 0; e < log.records.size(); ++e) {
      const auto& rec = log.records[e];
      if (rec.start <= t && t < rec.end) down = true;
      if (rec.start > t && (!next || rec.start < log.records[*next].start)) next = e;
      if (rec.end <= t && (!last_end || rec.end > *last_end)) last_end = rec.end;
    }
    HealthState s = HealthState::healthy;
    if (down) {
      s = HealthState::excluded;
    } else if (op && !(frame.at(r, *op) > cfg.operation_signal->threshold)) {
      s = HealthState::excluded;
    } else if (last_end && t < *last_end + cfg.warmup) {
      s = HealthState::excluded;
    } else if (next && t >= log.records[*next].start - cfg.cooldown) {
      s = HealthState::excluded;
    } else if (next && log.records[*next].kind == phmprep::EventKind::failure) {
      const auto& rec = log.records[*next];
      const auto& w = cfg.windows_for(rec.failure_mode);
      if (t >= rec.start - w.degraded) s = HealthState::degraded;
      else if (t >= rec.start - w.degraded - w.transition) s = HealthState::transition;
    }
    out.push_back(s);
  }
  return out;
}

/// Central differences of `loss` with respect to every parameter.
inline std::vector<double> numeric_gradient(phmprep::Network net, const std::function<double(const phmprep::Network&)>& loss,
                                            double eps = 1e-5) {
  std::vector<double> g(net.parameter_count());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double keep = net.parameters()[i];
    net.parameters()[i] = keep + eps;
    const double up = loss(net);
    net.parameters()[i] = keep - eps;
    const double down = loss(net);
    net.parameters()[i] = keep;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

/// |a - b| / max(|a|, |b|), with a floor of 1e-6 on the denominator so that
/// gradients that vanish analytically are compared absolutely.
inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

struct Schedule {
  phmprep::SensorFrame frame;
  phmprep::EventLog log;
  phmprep::LabelingConfig cfg;
};

/// Random event log over a regularly sampled frame with an operation signal.
/// Failures are frequently packed close together so degraded and transition
/// windows of consecutive failures overlap.
inline Schedule random_schedule(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](Timestamp lo, Timestamp hi) { return std::uniform_int_distribution<Timestamp>(lo, hi)(rng); };
  const Timestamp step = uni(1, 3) * 10;
  const std::size_t n = static_cast<std::size_t>(uni(300, 1500));
  std::vector<Timestamp> ts(n);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = 1000 + static_cast<Timestamp>(i) * step;
    values[i] = uni(0, 19) == 0 ? 0.0 : 1.0;
  }
  std::vector<phmprep::EventRecord> records;
  const int n_events = static_cast<int>(uni(0, 12));
  const Timestamp span = static_cast<Timestamp>(n) * step;
  for (int e = 0; e < n_events; ++e) {
    phmprep::EventRecord rec;
    rec.start = uni(800, 1000 + span + 200);
    rec.end = rec.start + uni(1, 8) * step;
    const int kind = static_cast<int>(uni(0, 5));
    if (kind <= 2) {
      rec.kind = phmprep::EventKind::failure;
      rec.component = "C1";
      rec.failure_mode = kind == 0 ? "m1" : "m2";
      if (e > 0 && uni(0, 1) == 0) {  // pack right after the previous event
        const auto& prev = records.back();
        rec.start = prev.end + uni(1, 20) * step / 2;
        rec.end = rec.start + uni(1, 4) * step;
      }
    } else {
      rec.kind = kind == 3 ? phmprep::EventKind::normal_stop : kind == 4 ? phmprep::EventKind::pause
                                                                         : phmprep::EventKind::external;
    }
    records.push_back(rec);
  }
  Schedule s;
  std::vector<double> cells;
  for (std::size_t i = 0; i < n; ++i) {
    cells.push_back(values[i]);
    cells.push_back(static_cast<double>(i));
  }
  s.frame = phmprep::SensorFrame(std::move(ts), {"run", "x"}, std::move(cells));
  s.log = phmprep::make_event_log(std::move(records));
  s.cfg.windows = {uni(0, 30) * step, uni(0, 30) * step};
  s.cfg.warmup = uni(0, 5) * step;
  s.cfg.cooldown = uni(0, 5) * step;
  if (uni(0, 1)) s.cfg.per_mode["m2"] = {uni(0, 40) * step, uni(0, 20) * step};
  if (uni(0, 2)) s.cfg.operation_signal = phmprep::OperationSignal{"run", 0.0};
  return s;
}

}  // namespace oracle

#include <gtest/gtest.h>

#include "phmprep/labeler.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace phmprep;
constexpr auto code_of = testing_support::error_code_of;

namespace {

constexpr Duration kHour = 3600;

SensorFrame regular_frame(Timestamp from, Timestamp to, Duration step, std::vector<double> current = {}) {
  std::vector<Timestamp> ts;
  for (Timestamp t = from; t < to; t += step) ts.push_back(t);
  if (current.empty()) current.assign(ts.size(), 1.0);
  return SensorFrame(std::move(ts), {"current"}, std::move(current));
}

EventRecord failure(Timestamp start, Timestamp end, std::string mode = "FM1") {
  return {start, end, EventKind::failure, "C1", std::move(mode), ""};
}

EventRecord stop(Timestamp start, Timestamp end) { return {start, end, EventKind::normal_stop, {}, {}, ""}; }

LabelingConfig no_margins() {
  LabelingConfig cfg;
  cfg.warmup = cfg.cooldown = 0;
  return cfg;
}

HealthState state_at(const SensorFrame& f, const LabelSequence& s, Timestamp t) {
  const auto it = std::lower_bound(f.timestamps().begin(), f.timestamps().end(), t);
  return s.labels[static_cast<std::size_t>(it - f.timestamps().begin())].state;
}

}  // namespace

TEST(Intervals, StopAndFailure) {
  SensorFrame f = regular_frame(0, 200, 1);
  EventLog log = make_event_log({stop(50, 52), failure(100, 102)});
  const auto iv = extract_operational_intervals(log, f, no_margins());
  ASSERT_EQ(iv.intervals.size(), 3u);
  EXPECT_EQ(iv.intervals[0].begin, 0);
  EXPECT_EQ(iv.intervals[0].end, 50);
  EXPECT_EQ(iv.intervals[0].terminating_event, 0u);
  EXPECT_EQ(iv.intervals[1].begin, 52);
  EXPECT_EQ(iv.intervals[1].end, 100);
  EXPECT_EQ(iv.intervals[1].terminating_event, 1u);
  EXPECT_FALSE(iv.intervals[2].terminating_event);
  EXPECT_EQ(iv.interval_of_row[50], -1);
  EXPECT_EQ(iv.interval_of_row[51], -1);
}

TEST(Intervals, EmptyLogIsOneInterval) {
  SensorFrame f = regular_frame(10, 20, 1);
  const auto iv = extract_operational_intervals({}, f, no_margins());
  ASSERT_EQ(iv.intervals.size(), 1u);
  EXPECT_FALSE(iv.intervals[0].terminating_event);
  EXPECT_EQ(iv.intervals[0].begin, 10);
}

TEST(Intervals, OperationSignalMasksRows) {
  std::vector<double> current(100, 5.0);
  for (int t = 60; t < 70; ++t) current[static_cast<std::size_t>(t)] = t % 2 ? 0.0 : -1.0;
  SensorFrame f = regular_frame(0, 100, 1, current);
  LabelingConfig cfg = no_margins();
  cfg.operation_signal = OperationSignal{"current", 0.0};
  const auto iv = extract_operational_intervals({}, f, cfg);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(iv.in_operation[static_cast<std::size_t>(t)], t < 60 || t >= 70) << t;
}

TEST(Labels, DegradedAndTransitionWindows) {
  const Timestamp tf = 100 * kHour;
  SensorFrame f = regular_frame(90 * kHour, 101 * kHour, 60);
  EventLog log = make_event_log({failure(tf, tf + kHour)});
  LabelingConfig cfg = no_margins();
  cfg.windows = {2 * kHour, 3 * kHour};
  const LabelSequence s = label_frame(log, f, cfg);
  EXPECT_EQ(state_at(f, s, 95 * kHour - 60), HealthState::healthy);
  EXPECT_EQ(state_at(f, s, 95 * kHour), HealthState::transition);
  EXPECT_EQ(state_at(f, s, 98 * kHour - 60), HealthState::transition);
  EXPECT_EQ(state_at(f, s, 98 * kHour), HealthState::degraded);
  EXPECT_EQ(state_at(f, s, 100 * kHour - 60), HealthState::degraded);
  EXPECT_EQ(state_at(f, s, 100 * kHour), HealthState::excluded);
  EXPECT_EQ(s.count(HealthState::degraded), 120u);
  EXPECT_EQ(s.count(HealthState::transition), 180u);
}

TEST(Labels, NoFailuresMeansHealthyAfterWarmup) {
  SensorFrame f = regular_frame(0, 100, 1);
  EventLog log = make_event_log({stop(40, 45)});
  LabelingConfig cfg;
  cfg.warmup = 5;
  cfg.cooldown = 3;
  const LabelSequence s = label_frame(log, f, cfg);
  for (Timestamp t = 0; t < 100; ++t) {
    const bool usable = (t < 37) || (t >= 50);
    EXPECT_EQ(s.labels[static_cast<std::size_t>(t)].state, usable ? HealthState::healthy : HealthState::excluded) << t;
  }
}

TEST(Labels, OverlappingFailuresMatchOracle) {
  const Timestamp t1 = 100 * kHour, t2 = 101 * kHour + kHour / 2;
  SensorFrame f = regular_frame(90 * kHour, 103 * kHour, 60);
  EventLog log = make_event_log({failure(t1, t1 + 15 * 60), failure(t2, t2 + kHour, "FM2")});
  LabelingConfig cfg = no_margins();
  cfg.windows = {2 * kHour, 3 * kHour};
  const LabelSequence s = label_frame(log, f, cfg);
  const auto expected = oracle::labels(log, f, cfg);
  for (std::size_t r = 0; r < f.rows(); ++r) ASSERT_EQ(s.labels[r].state, expected[r]) << f.timestamps()[r];
  // Between the two failures every usable row precedes the second within its degraded window.
  EXPECT_EQ(state_at(f, s, t1 + 20 * 60), HealthState::degraded);
}

TEST(Labels, RandomSchedulesMatchOracle) {
  for (std::uint64_t seed = 1000; seed < 1050; ++seed) {
    const auto sch = oracle::random_schedule(seed);
    const LabelSequence s = label_frame(sch.log, sch.frame, sch.cfg);
    const auto expected = oracle::labels(sch.log, sch.frame, sch.cfg);
    std::size_t mismatches = 0;
    for (std::size_t r = 0; r < expected.size(); ++r) mismatches += s.labels[r].state != expected[r];
    EXPECT_EQ(mismatches, 0u) << "seed " << seed;
  }
}

TEST(Labels, PerModeWindows) {
  SensorFrame f = regular_frame(0, 1000, 10);
  EventLog log = make_event_log({failure(400, 410, "short"), failure(900, 910, "long")});
  LabelingConfig cfg = no_margins();
  cfg.windows = {50, 0};
  cfg.per_mode["long"] = {200, 0};
  const LabelSequence s = label_frame(log, f, cfg);
  EXPECT_EQ(state_at(f, s, 340), HealthState::healthy);
  EXPECT_EQ(state_at(f, s, 350), HealthState::degraded);
  EXPECT_EQ(state_at(f, s, 690), HealthState::healthy);
  EXPECT_EQ(state_at(f, s, 700), HealthState::degraded);
}

TEST(Labels, NegativeWindowRejected) {
  SensorFrame f = regular_frame(0, 10, 1);
  LabelingConfig cfg;
  cfg.windows.degraded = -1;
  EXPECT_EQ(code_of([&] { label_frame({}, f, cfg); }), Errc::InvalidArgument);
}

TEST(Partition, Arithmetic) {
  SensorFrame f = regular_frame(0, 10, 1);
  EventLog log = make_event_log({failure(100, 101, "m1")});
  LabelSequence s;
  using H = HealthState;
  for (H h : {H::healthy, H::healthy, H::healthy, H::healthy, H::healthy, H::healthy, H::degraded, H::degraded,
              H::transition, H::excluded})
    s.labels.push_back({h, 0});
  const StatePartition p = partition_by_state(f, s, log);
  EXPECT_EQ(p.healthy.rows(), 6u);
  ASSERT_EQ(p.degraded.size(), 1u);
  EXPECT_EQ(p.degraded.at("m1").rows(), 2u);
  EXPECT_EQ(p.transition.rows(), 1u);
  EXPECT_EQ(p.excluded_rows, 1u);
}

TEST(Partition, AllExcludedAndTwoModes) {
  SensorFrame f = regular_frame(0, 1000, 10);
  LabelSequence none;
  none.labels.assign(f.rows(), Label{});
  const StatePartition empty = partition_by_state(f, none, {});
  EXPECT_EQ(empty.healthy.rows(), 0u);
  EXPECT_TRUE(empty.degraded.empty());

  EventLog log = make_event_log({failure(400, 410, "m1"), failure(900, 910, "m2")});
  LabelingConfig cfg = no_margins();
  cfg.windows = {50, 20};
  const StatePartition p = partition_by_state(f, label_frame(log, f, cfg), log);
  ASSERT_EQ(p.degraded.size(), 2u);
  EXPECT_EQ(p.degraded.at("m1").rows(), 5u);
  EXPECT_EQ(p.degraded.at("m2").rows(), 5u);
}

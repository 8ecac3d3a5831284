#include <gtest/gtest.h>

#include <set>

#include "phmprep/labeler.hpp"
#include "phmprep/outlier.hpp"
#include "phmprep/pipeline/scenario.hpp"
#include "phmprep/pipeline/stages.hpp"
#include "phmprep/reduce.hpp"
#include "phmprep/select.hpp"
#include "phmprep/synth.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace phmprep;
constexpr auto code_of = testing_support::error_code_of;

namespace {

SynthConfig small_config(std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.duration_hours = 300;
  c.clusters = {{3, SignalKind::stationary, 0.99}, {3, SignalKind::periodic, 0.99}, {3, SignalKind::drift, 0.99}};
  c.n_independent = 6;
  c.n_constant = 2;
  c.n_unrelated = 1;
  c.schedule_spec.failures = 2;
  c.schedule_spec.normal_stops = 2;
  c.schedule_spec.pauses = 2;
  c.degradation.affected = {{"FM1", {"ind_01"}}, {"FM2", {"ind_02"}}};
  return c;
}

const Scenario& default_scenario() {
  static const Scenario s = generate_scenario(default_synth_config());
  return s;
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Synth, Deterministic) {
  const Scenario a = generate_scenario(small_config(3)), b = generate_scenario(small_config(3));
  EXPECT_TRUE(same_cells(a.frame, b.frame));
  EXPECT_EQ(a.log.records, b.log.records);
  EXPECT_EQ(to_json(a.truth, a.frame), to_json(b.truth, b.frame));
  const Scenario c = generate_scenario(small_config(4));
  EXPECT_FALSE(same_cells(a.frame, c.frame));
}

TEST(Synth, DefaultScenarioShape) {
  const Scenario& s = default_scenario();
  EXPECT_EQ(s.frame.rows(), 120000u);
  EXPECT_EQ(s.frame.cols(), 50u);
  EXPECT_EQ(s.log.failure_count(), 12u);
  std::set<std::string> modes;
  for (const auto& r : s.log.records)
    if (r.kind == EventKind::failure) modes.insert(*r.failure_mode);
  EXPECT_EQ(modes.size(), 2u);
  for (const auto& r : s.log.records) {
    EXPECT_EQ((r.start - s.frame.timestamps()[0]) % 60, 0);
    EXPECT_EQ((r.end - s.frame.timestamps()[0]) % 60, 0);
  }
}

TEST(Synth, IntraClusterCorrelationNearTarget) {
  const Scenario& s = default_scenario();
  for (std::size_t k = 0; k < s.truth.clusters.size(); ++k) {
    const auto& members = s.truth.clusters[k];
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        // outliers are excluded from the measurement, as the cutoffs would
        auto a = s.frame.column(s.frame.index_of(members[i]));
        auto b = s.frame.column(s.frame.index_of(members[j]));
        for (const auto& o : s.truth.outliers) {
          if (o.feature == members[i] || o.feature == members[j]) a[o.row] = b[o.row] = kMissing;
        }
        EXPECT_NEAR(std::abs(*oracle::pearson(a, b)), s.truth.cluster_correlation[k], 0.02) << members[i] << members[j];
      }
  }
}

TEST(Synth, DegradedMeanShiftNearConfigured) {
  const Scenario& s = default_scenario();
  const SynthConfig cfg = default_synth_config();
  SynthConfig flat_cfg = cfg;
  flat_cfg.degradation.mean_shift = 0.0;
  const Scenario flat = generate_scenario(flat_cfg);  // same noise, no shift
  std::set<std::pair<std::size_t, std::string>> spiked;
  for (const auto& o : s.truth.outliers) spiked.insert({o.row, o.feature});
  std::vector<double> pooled;
  for (const auto& [mode, sensors] : cfg.degradation.affected) {
    for (const auto& name : sensors) {
      const auto col = s.frame.column(s.frame.index_of(name));
      const auto base = flat.frame.column(flat.frame.index_of(name));
      const auto [mean, sd] = s.truth.nominal_moments.at(name);
      std::vector<double> delta;
      for (const auto& onset : s.truth.onsets) {
        if (onset.mode != mode) continue;
        for (std::size_t r = 0; r < col.size(); ++r) {
          const Timestamp t = s.frame.timestamps()[r];
          if (t < onset.onset || t >= onset.failure || is_missing(col[r]) || spiked.count({r, name})) continue;
          delta.push_back((col[r] - base[r]) / sd);
          pooled.push_back((col[r] - mean) / sd);
        }
      }
      ASSERT_GT(delta.size(), 500u);
      EXPECT_NEAR(static_cast<double>(oracle::mean(delta)), cfg.degradation.mean_shift, 0.1) << name;
    }
  }
  EXPECT_NEAR(static_cast<double>(oracle::mean(pooled)), cfg.degradation.mean_shift, 0.1);
}

TEST(Synth, DegradedWindowsMatchLabeler) {
  const Scenario& s = default_scenario();
  const SynthConfig synth = default_synth_config();
  PipelineConfig cfg = pipeline_config_for(synth, s.truth);
  cfg.labeling.warmup = cfg.labeling.cooldown = 0;
  const LabelSequence labels = label_frame(s.log, s.frame, cfg.labeling);
  const auto motor = s.frame.column(s.frame.index_of(s.truth.operation_signal));
  std::size_t degraded = 0;
  for (std::size_t r = 0; r < s.frame.rows(); ++r) {
    // communication losses blank the operation signal, which the labeler reads as stopped
    const bool truth = s.truth.states[r] == HealthState::degraded && !is_missing(motor[r]);
    const bool labeled = labels.labels[r].state == HealthState::degraded;
    degraded += truth;
    ASSERT_EQ(truth, labeled) << r;
  }
  EXPECT_LE(degraded, 12u * 120u);
  EXPECT_GT(degraded, 12u * 110u);
}

TEST(Synth, GroundTruthRecovery) {
  const Scenario& s = default_scenario();
  const PipelineConfig cfg = pipeline_config_for(default_synth_config(), s.truth);

  // every injected spike and nothing else lies outside the nominal bounds
  const auto [clean, removed] = apply_cutoffs(s.frame, s.truth.nominal_bounds);
  std::set<Timestamp> kept(clean.timestamps().begin(), clean.timestamps().end());
  std::set<std::size_t> dropped;
  for (std::size_t r = 0; r < s.frame.rows(); ++r)
    if (!kept.count(s.frame.timestamps()[r])) dropped.insert(r);
  EXPECT_EQ(dropped, s.truth.outlier_rows());
  EXPECT_FALSE(dropped.empty());

  const auto selected = run_selection(s.frame, cfg.selection).first;
  const auto after_cutoffs = apply_cutoffs(selected, detail::applicable_cutoffs(cfg.cutoffs, selected).first).first;
  const auto [reduced, cv] = low_variability_filter(after_cutoffs, cfg.cv_threshold);
  std::vector<std::string> cv_dropped;
  for (const auto& e : cv.dropped) cv_dropped.push_back(e.name);
  EXPECT_EQ(as_set(cv_dropped), as_set(s.truth.constant_channels));

  const auto report = correlation_dedup(pearson_matrix(reduced), cfg.correlation_threshold, 1);
  std::set<std::set<std::string>> groups, clusters;
  for (const auto& g : report.correlation_groups) {
    auto members = as_set(g.dropped);
    members.insert(g.kept);
    groups.insert(members);
  }
  for (const auto& c : s.truth.clusters) clusters.insert(as_set(c));
  EXPECT_EQ(groups, clusters);
}

TEST(Synth, SmallConfigGroundTruth) {
  const Scenario s = generate_scenario(small_config(9));
  const auto [reduced, cv] = low_variability_filter(s.frame, 0.05);
  std::vector<std::string> names;
  for (const auto& e : cv.dropped) names.push_back(e.name);
  EXPECT_EQ(as_set(names), as_set(s.truth.constant_channels));
  EXPECT_EQ(s.truth.constant_channels.size(), 2u);
  const auto without_spikes = apply_cutoffs(reduced.select_columns([&] {
    std::vector<std::string> keep;
    for (const auto& n : reduced.feature_names())
      if (n.rfind("unrel_", 0) != 0) keep.push_back(n);
    return keep;
  }()), [&] {
    CutoffSpec spec = s.truth.nominal_bounds;
    for (const auto& n : s.truth.constant_channels) spec.erase(n);
    for (const auto& n : s.truth.unrelated_channels) spec.erase(n);
    return spec;
  }()).first;
  const auto report = correlation_dedup(pearson_matrix(without_spikes), 0.95, 5);
  EXPECT_EQ(report.correlation_groups.size(), 3u);
}

TEST(Synth, ConfigErrors) {
  SynthConfig c = small_config(1);
  c.clusters[0].correlation = 1.0;
  EXPECT_EQ(code_of([&] { generate_scenario(c); }), Errc::InfeasibleCorrelation);
  c = small_config(1);
  c.clusters[0].correlation = 0.999;
  EXPECT_EQ(code_of([&] { generate_scenario(c); }), Errc::InfeasibleCorrelation);
  c = small_config(1);
  c.duration_hours = 20;
  EXPECT_EQ(code_of([&] { generate_scenario(c); }), Errc::ScheduleOverflow);
  c = small_config(1);
  c.degradation.affected["FM1"] = {"nope"};
  EXPECT_EQ(code_of([&] { generate_scenario(c); }), Errc::UnknownFeature);
}

TEST(Synth, ConfigJsonRoundTrip) {
  const SynthConfig c = default_synth_config(11);
  EXPECT_EQ(to_json(synth_config_from_json(to_json(c))), to_json(c));
}

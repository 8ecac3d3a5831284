#pragma once

// Pipeline stages. Every stage reads its inputs from the run directory (or
// the configured raw files), writes its artifacts under "NN_name/" and
// records their hashes in manifest.json, so running the stages one by one
// and running them all at once are the same computation.

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "phmprep/baselines/autoencoder.hpp"
#include "phmprep/baselines/pca.hpp"
#include "phmprep/core/error.hpp"
#include "phmprep/core/frame.hpp"
#include "phmprep/core/random.hpp"
#include "phmprep/ingest.hpp"
#include "phmprep/labeler.hpp"
#include "phmprep/models/forest.hpp"
#include "phmprep/models/metrics.hpp"
#include "phmprep/models/mlp.hpp"
#include "phmprep/models/search.hpp"
#include "phmprep/outlier.hpp"
#include "phmprep/pipeline/config.hpp"
#include "phmprep/pipeline/manifest.hpp"
#include "phmprep/pipeline/serialize.hpp"
#include "phmprep/prepare.hpp"
#include "phmprep/reduce.hpp"
#include "phmprep/select.hpp"

namespace phmprep {

namespace fs = std::filesystem;

struct StageInfo {
  std::size_t index;
  const char* name;
  const char* group;  // CLI subcommand that runs it
};

inline const std::vector<StageInfo>& full_pipeline_stages() {
  static const std::vector<StageInfo> stages{
      {1, "ingest", "select"},          {2, "select", "select"},          {3, "outlier_cutoffs", "reduce"},
      {4, "reduce_cv", "reduce"},       {5, "reduce_correlation", "reduce"}, {6, "reload", "reduce"},
      {7, "label", "label"},            {8, "partition", "label"},        {9, "healthy_cutoffs", "prepare"},
      {10, "prepare", "prepare"},       {11, "train", "train"},           {12, "evaluate", "evaluate"}};
  return stages;
}

inline const std::vector<StageInfo>& baseline_stages() {
  static const std::vector<StageInfo> stages{{1, "ingest", "select"},
                                             {2, "baseline_prepare", "prepare"},
                                             {3, "baseline_reduce", "reduce"},
                                             {4, "baseline_train", "train"},
                                             {5, "baseline_evaluate", "evaluate"}};
  return stages;
}

inline const std::vector<StageInfo>& stage_plan(const PipelineConfig& cfg) {
  return cfg.baseline.preset == BaselinePreset::none ? full_pipeline_stages() : baseline_stages();
}

inline std::string stage_dir(const StageInfo& s) {
  std::string index = std::to_string(s.index);
  if (index.size() < 2) index.insert(0, "0");
  return index + "_" + s.name;
}

/// Stage directory of the named stage in the current plan.
inline std::string stage_dir(const PipelineConfig& cfg, std::string_view name) {
  for (const auto& s : stage_plan(cfg))
    if (name == s.name) return stage_dir(s);
  throw Error(Errc::InvalidArgument, "no stage named " + std::string(name));
}

namespace detail {

inline SensorFrame load_raw_frame(const PipelineConfig& cfg) {
  std::set<std::string> categorical;
  for (const auto& e : cfg.encodings) categorical.insert(e.column);
  SensorFrame frame = load_sensor_frame(cfg.resolve(cfg.sensors), cfg.time_column, default_missing_tokens(), categorical);
  for (const auto& e : cfg.encodings) frame = encode_categorical(frame, e);
  return frame;
}

inline std::set<std::string> indicator_names(const PipelineConfig& cfg) {
  std::set<std::string> out;
  for (const auto& e : cfg.encodings)
    if (e.mode == CategoricalEncoding::Mode::one_hot)
      for (const auto& [category, code] : e.mapping) out.insert(e.column + "=" + category);
  return out;
}

/// Cutoffs for features still present; the rest are reported as not applied.
inline std::pair<CutoffSpec, std::vector<std::string>> applicable_cutoffs(const CutoffSpec& spec,
                                                                          const SensorFrame& frame) {
  CutoffSpec out;
  std::vector<std::string> skipped;
  for (const auto& [name, b] : spec) {
    if (frame.find(name))
      out[name] = b;
    else
      skipped.push_back(name);
  }
  return {out, skipped};
}

inline std::vector<std::size_t> complete_rows(const SensorFrame& frame) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    const auto row = frame.row(r);
    if (std::none_of(row.begin(), row.end(), [](double v) { return is_missing(v); })) rows.push_back(r);
  }
  return rows;
}

inline SensorFrame missing_to_zero(const SensorFrame& frame) {
  std::vector<double> values(frame.values().begin(), frame.values().end());
  for (double& v : values)
    if (is_missing(v)) v = 0.0;
  return SensorFrame(frame.timestamps(), frame.feature_names(), std::move(values));
}

inline json split_summary(const DataSplits& s) {
  auto one = [](const LabeledSet& set) { return json{{"rows", set.size()}, {"degraded", set.positives()}}; };
  return {{"train", one(s.train)}, {"validation", one(s.validation)}, {"test", one(s.test)}};
}

inline LabeledSet with_features(const LabeledSet& src, Matrix x, const std::string& prefix) {
  LabeledSet out;
  for (std::size_t j = 0; j < x.cols(); ++j) out.feature_names.push_back(prefix + std::to_string(j + 1));
  out.x = std::move(x);
  out.y = src.y;
  out.timestamps = src.timestamps;
  return out;
}

/// Columns whose non-missing values are all equal (or absent).
inline std::vector<std::string> constant_columns(const SensorFrame& frame) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < frame.cols(); ++c) {
    std::optional<double> first;
    bool varies = false;
    for (std::size_t r = 0; r < frame.rows() && !varies; ++r) {
      const double v = frame.at(r, c);
      if (is_missing(v)) continue;
      if (!first)
        first = v;
      else if (v != *first)
        varies = true;
    }
    if (!varies) out.push_back(frame.feature_names()[c]);
  }
  return out;
}

inline std::vector<std::string> degenerate_columns(const LabeledSet& set) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < set.x.cols(); ++c) {
    const auto col = set.x.column(c);
    if (col.empty() || std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); }))
      out.push_back(set.feature_names[c]);
  }
  return out;
}

inline LabeledSet drop_features(const LabeledSet& set, const std::vector<std::string>& drop) {
  if (drop.empty()) return set;
  const std::set<std::string> gone(drop.begin(), drop.end());
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < set.feature_names.size(); ++c)
    if (!gone.count(set.feature_names[c])) keep.push_back(c);
  LabeledSet out;
  for (std::size_t c : keep) out.feature_names.push_back(set.feature_names[c]);
  out.x = Matrix(set.size(), keep.size());
  for (std::size_t r = 0; r < set.size(); ++r)
    for (std::size_t k = 0; k < keep.size(); ++k) out.x(r, k) = set.x(r, keep[k]);
  out.y = set.y;
  out.timestamps = set.timestamps;
  return out;
}

}  // namespace detail

/// Executes stages of one run directory.
class PipelineRunner {
 public:
  PipelineRunner(PipelineConfig cfg, fs::path out) : cfg_(std::move(cfg)), out_(std::move(out)) {
    PipelineConfig hashed = cfg_;
    hashed.output.clear();  // the same run written elsewhere keeps its manifest
    header_.config_sha256 = sha256_hex(to_json(hashed).dump());
    header_.seed = cfg_.seed;
    header_.preset = to_string(cfg_.baseline.preset);
  }

  const PipelineConfig& config() const noexcept { return cfg_; }
  const fs::path& output() const noexcept { return out_; }

  void run_all() {
    for (const auto& s : stage_plan(cfg_)) run(s);
  }

  /// Runs the stages that belong to a CLI subcommand; returns how many ran.
  std::size_t run_group(std::string_view group) {
    std::size_t n = 0;
    for (const auto& s : stage_plan(cfg_))
      if (group == s.group) {
        run(s);
        ++n;
      }
    return n;
  }

  void run(const StageInfo& s) {
    const std::string dir = stage_dir(s);
    std::error_code ec;
    fs::remove_all(out_ / dir, ec);
    written_.clear();
    try {
      dispatch(s.name, dir);
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(s.name, e);
    } catch (const json::exception& e) {
      throw StageError(s.name, Error(Errc::MalformedInput, e.what()));
    }
    StageEntry entry{s.index, s.name, {}};
    for (const auto& rel : written_) entry.files[rel] = "";
    record_stage(out_, header_, std::move(entry));
  }

 private:
  // ---- file helpers

  fs::path path_of(const std::string& rel) const { return out_ / rel; }

  void put(const std::string& rel, std::string_view text) {
    write_file(path_of(rel), text);
    written_.push_back(rel);
  }
  void put_json(const std::string& rel, const json& j) { put(rel, j.dump(2) + "\n"); }
  void put_frame(const std::string& rel, const SensorFrame& f) { put(rel, sensor_frame_csv(f, cfg_.time_column)); }
  void put_set(const std::string& rel, const LabeledSet& set) {
    write_labeled_set(set, path_of(rel));
    written_.push_back(rel);
  }

  SensorFrame frame_from(std::string_view stage, const char* file) const {
    return load_sensor_frame(path_of(stage_dir(cfg_, stage) + "/" + file), cfg_.time_column);
  }
  json json_from(std::string_view stage, const char* file) const {
    return read_json(path_of(stage_dir(cfg_, stage) + "/" + file));
  }
  LabeledSet set_from(std::string_view stage, const std::string& file) const {
    return load_labeled_set(path_of(stage_dir(cfg_, stage) + "/" + file));
  }

  std::uint64_t sub_seed(const std::string& label) const { return derive_seed(cfg_.seed, "stage." + label); }

  void dispatch(const std::string& name, const std::string& dir) {
    static const std::map<std::string, void (PipelineRunner::*)(const std::string&)> table{
        {"ingest", &PipelineRunner::ingest},
        {"select", &PipelineRunner::select},
        {"outlier_cutoffs", &PipelineRunner::outlier_cutoffs},
        {"reduce_cv", &PipelineRunner::reduce_cv},
        {"reduce_correlation", &PipelineRunner::reduce_correlation},
        {"reload", &PipelineRunner::reload},
        {"label", &PipelineRunner::label},
        {"partition", &PipelineRunner::partition},
        {"healthy_cutoffs", &PipelineRunner::healthy_cutoffs},
        {"prepare", &PipelineRunner::prepare},
        {"train", &PipelineRunner::train},
        {"evaluate", &PipelineRunner::evaluate_models},
        {"baseline_prepare", &PipelineRunner::baseline_prepare},
        {"baseline_reduce", &PipelineRunner::baseline_reduce},
        {"baseline_train", &PipelineRunner::baseline_train},
        {"baseline_evaluate", &PipelineRunner::baseline_evaluate}};
    (this->*table.at(name))(dir);
  }

  // ---- full pipeline

  void ingest(const std::string& dir) {
    const SensorFrame frame = detail::load_raw_frame(cfg_);
    const EventLog log = load_event_log(cfg_.resolve(cfg_.events));
    if (cfg_.labeling.operation_signal && !frame.find(cfg_.labeling.operation_signal->feature))
      throw Error(Errc::UnknownFeature, "operation signal " + cfg_.labeling.operation_signal->feature);
    std::size_t missing = 0;
    for (double v : frame.values()) missing += is_missing(v);
    std::map<std::string, std::size_t> kinds, modes;
    for (const auto& r : log.records) {
      ++kinds[to_string(r.kind)];
      if (r.failure_mode) ++modes[*r.failure_mode];
    }
    put_json(dir + "/report.json",
             {{"rows", frame.rows()},
              {"columns", frame.cols()},
              {"features", frame.feature_names()},
              {"first_timestamp", frame.timestamps().front()},
              {"last_timestamp", frame.timestamps().back()},
              {"sampling_period_hint", frame.sampling_period_hint() ? json(*frame.sampling_period_hint()) : json(nullptr)},
              {"missing_cells", missing},
              {"events", kinds},
              {"failure_modes", modes},
              {"inputs",
               {{"sensors_sha256", sha256_file(cfg_.resolve(cfg_.sensors))},
                {"events_sha256", sha256_file(cfg_.resolve(cfg_.events))}}}});
  }

  void select(const std::string& dir) {
    auto [frame, report] = run_selection(detail::load_raw_frame(cfg_), cfg_.selection);
    put_frame(dir + "/frame.csv", frame);
    put_json(dir + "/report.json", to_json(report));
  }

  void outlier_cutoffs(const std::string& dir) {
    const SensorFrame frame = frame_from("select", "frame.csv");
    const auto [spec, skipped] = detail::applicable_cutoffs(cfg_.cutoffs, frame);
    auto [kept, report] = apply_cutoffs(frame, spec);
    json j = to_json(report);
    j["not_applied"] = skipped;
    j["remaining_rows"] = kept.rows();
    put_frame(dir + "/frame.csv", kept);
    put_json(dir + "/report.json", j);
  }

  void reduce_cv(const std::string& dir) {
    const SensorFrame frame = frame_from("outlier_cutoffs", "frame.csv");
    auto [kept, result] = low_variability_filter(frame, cfg_.cv_threshold);
    json j = to_json(result, cfg_.cv_threshold);
    j["remaining"] = kept.feature_names();
    put_json(dir + "/report.json", j);
  }

  void reduce_correlation(const std::string& dir) {
    const SensorFrame frame = frame_from("outlier_cutoffs", "frame.csv");
    const json cv = json_from("reduce_cv", "report.json");
    const auto remaining = cv.at("remaining").get<std::vector<std::string>>();
    const CorrelationMatrix m = pearson_matrix(frame.select_columns(remaining));
    ReductionReport report = correlation_dedup(m, cfg_.correlation_threshold, sub_seed("reduce_correlation"));
    for (const auto& name : cv.at("dropped").get<std::vector<std::string>>()) report.dropped_low_cv.push_back({name, {}});
    for (const auto& e : cv.at("cv"))
      for (auto& d : report.dropped_low_cv)
        if (d.name == e.at("feature").get<std::string>() && !e.at("cv").is_null()) d.cv = e.at("cv").get<double>();
    report.undefined_cv = cv.at("undefined_cv").get<std::vector<std::string>>();
    json j = to_json(report);
    j["threshold"] = cfg_.correlation_threshold;
    put(dir + "/correlation.csv", correlation_csv(m));
    put_json(dir + "/report.json", j);
  }

  /// Raw rows again, restricted to the surviving features (plus the
  /// operation signal, which labeling needs even when it was reduced away).
  void reload(const std::string& dir) {
    const auto features = json_from("reduce_correlation", "report.json").at("final_features").get<std::vector<std::string>>();
    std::set<std::string> wanted(features.begin(), features.end());
    bool signal_only = false;
    if (cfg_.labeling.operation_signal && !wanted.count(cfg_.labeling.operation_signal->feature)) {
      wanted.insert(cfg_.labeling.operation_signal->feature);
      signal_only = true;
    }
    const SensorFrame raw = apply_exclusions(detail::load_raw_frame(cfg_), {}, cfg_.selection.keep_window);
    std::vector<std::string> ordered;
    for (const auto& n : raw.feature_names())
      if (wanted.count(n)) ordered.push_back(n);
    const SensorFrame frame = raw.select_columns(ordered);
    put_frame(dir + "/frame.csv", frame);
    put_json(dir + "/report.json", {{"rows", frame.rows()},
                                    {"features", features},
                                    {"operation_signal_for_labeling_only", signal_only}});
  }

  void label(const std::string& dir) {
    const SensorFrame frame = frame_from("reload", "frame.csv");
    const EventLog log = load_event_log(cfg_.resolve(cfg_.events));
    const OperationalIntervals iv = extract_operational_intervals(log, frame, cfg_.labeling);
    const LabelSequence labels = generate_labels(iv, log, cfg_.labeling, frame);
    std::map<std::string, std::size_t> by_mode;
    for (const auto& l : labels.labels)
      if (l.state == HealthState::degraded) ++by_mode[degraded_key(log, l)];
    put(dir + "/labels.csv", labels_csv(frame, labels, log));
    put(dir + "/intervals.csv", intervals_csv(iv, log));
    put_json(dir + "/report.json", {{"intervals", iv.intervals.size()},
                                    {"healthy", labels.count(HealthState::healthy)},
                                    {"transition", labels.count(HealthState::transition)},
                                    {"degraded", labels.count(HealthState::degraded)},
                                    {"excluded", labels.count(HealthState::excluded)},
                                    {"degraded_by_mode", by_mode},
                                    {"labeling", to_json(cfg_.labeling)}});
  }

  void partition(const std::string& dir) {
    SensorFrame frame = frame_from("reload", "frame.csv");
    const EventLog log = load_event_log(cfg_.resolve(cfg_.events));
    const LabelSequence labels = load_labels(path_of(stage_dir(cfg_, "label") + "/labels.csv"), frame);
    const auto features = json_from("reload", "report.json").at("features").get<std::vector<std::string>>();
    frame = frame.select_columns(features);
    const StatePartition parts = partition_by_state(frame, labels, log);
    put_frame(dir + "/healthy.csv", parts.healthy);
    json modes = json::object();
    for (const auto& [mode, f] : parts.degraded) {
      const std::string file = "degraded_" + file_stem(mode) + ".csv";
      put_frame(dir + "/" + file, f);
      modes[mode] = {{"rows", f.rows()}, {"file", file}};
    }
    put_json(dir + "/report.json", {{"healthy", parts.healthy.rows()},
                                    {"transition_discarded", parts.transition.rows()},
                                    {"excluded", parts.excluded_rows},
                                    {"degraded", modes}});
  }

  void healthy_cutoffs(const std::string& dir) {
    const SensorFrame healthy = frame_from("partition", "healthy.csv");
    const auto [spec, skipped] = detail::applicable_cutoffs(cfg_.cutoffs, healthy);
    auto [kept, report] = apply_cutoffs(healthy, spec);
    json j = to_json(report);
    j["not_applied"] = skipped;
    j["remaining_rows"] = kept.rows();
    put_frame(dir + "/healthy.csv", kept);
    put_json(dir + "/report.json", j);
  }

  void prepare(const std::string& dir) {
    const SensorFrame healthy_all = frame_from("healthy_cutoffs", "healthy.csv");
    const json part = json_from("partition", "report.json");
    std::vector<SensorFrame> modes;
    for (const auto& [mode, info] : part.at("degraded").items())
      modes.push_back(load_sensor_frame(path_of(stage_dir(cfg_, "partition") + "/" + info.at("file").get<std::string>()),
                                        cfg_.time_column));
    std::vector<const SensorFrame*> ptrs;
    for (const auto& f : modes) ptrs.push_back(&f);
    if (ptrs.empty()) throw Error(Errc::DegradedEmpty, "no degraded rows after labeling");
    const SensorFrame degraded_all = concat_rows(ptrs);

    // no imputation: rows with missing cells are left out
    const auto healthy_rows = detail::complete_rows(healthy_all);
    const auto degraded_rows = detail::complete_rows(degraded_all);
    const SensorFrame healthy = healthy_all.select_rows(healthy_rows);
    const SensorFrame degraded = degraded_all.select_rows(degraded_rows);

    SplitSpec spec = cfg_.split;
    spec.seed = sub_seed("prepare");
    DataSplits splits = balance_and_split(healthy, degraded, spec);
    const ScalerParams scaler = fit_scaler(splits.train, cfg_.scaler, detail::indicator_names(cfg_));
    put_set(dir + "/train.csv", transform(splits.train, scaler));
    put_set(dir + "/validation.csv", transform(splits.validation, scaler));
    put_set(dir + "/test.csv", transform(splits.test, scaler));
    put_json(dir + "/scaler.json", to_json(scaler));
    json j = detail::split_summary(splits);
    j["incomplete_rows_dropped"] = {{"healthy", healthy_all.rows() - healthy.rows()},
                                    {"degraded", degraded_all.rows() - degraded.rows()}};
    j["balance"] = to_string(spec.balance);
    put_json(dir + "/report.json", j);
  }

  /// Trains the configured classifier(s) on `train`, writing under `prefix`.
  json train_classifiers(const std::string& prefix, const LabeledSet& train, const LabeledSet& validation,
                         bool forest_on, bool mlp_on, const std::string& seed_label) {
    json report = json::object();
    if (forest_on) {
      ForestParams params = cfg_.forest.params;
      if (!cfg_.forest.grid.empty()) {
        const CvResult cv = cross_validate(train, cfg_.forest.grid, cfg_.forest.folds, sub_seed(seed_label + ".cv"));
        params = cv.best;
        json grid = json::array();
        for (std::size_t g = 0; g < cfg_.forest.grid.size(); ++g)
          grid.push_back({{"params", to_json(cfg_.forest.grid[g])}, {"mean_accuracy", cv.mean_accuracy[g]}});
        put_json(prefix + "forest_cv.json", {{"folds", cfg_.forest.folds}, {"grid", grid}});
      }
      params.seed = sub_seed(seed_label + ".forest");
      const ForestModel model = train_forest(train, params);
      put_json(prefix + "model_random_forest.json", to_json(model));
      report["random_forest"] = {{"params", to_json(params)}};
    }
    if (mlp_on) {
      MlpParams params = cfg_.mlp.params;
      params.seed = sub_seed(seed_label + ".mlp");
      if (cfg_.mlp.search) {
        const SearchResult search =
            random_search(train, validation, *cfg_.mlp.search, cfg_.mlp.draws, sub_seed(seed_label + ".search"));
        params = search.best;
        json draws = json::array();
        for (const auto& d : search.draws)
          draws.push_back({{"params", to_json(d.params)}, {"validation_accuracy", d.validation_accuracy}});
        put_json(prefix + "mlp_search.json", {{"draws", draws}});
      }
      const MlpModel model = train_mlp(train, validation, params);
      put_json(prefix + "model_mlp.json", to_json(model));
      put(prefix + "curves.csv", curves_csv(model.curve));
      report["mlp"] = {{"params", to_json(params)}, {"warnings", model.warnings}};
    }
    return report;
  }

  void train(const std::string& dir) {
    const LabeledSet train_set = set_from("prepare", "train.csv");
    const LabeledSet validation = set_from("prepare", "validation.csv");
    const json report = train_classifiers(dir + "/", train_set, validation, cfg_.forest.enabled, cfg_.mlp.enabled, "train");
    put_json(dir + "/report.json", {{"models", report}, {"train_rows", train_set.size()}});
  }

  /// Predictions of every model file found under `model_dir` on `test`.
  std::map<std::string, std::vector<int>> predict_all(const std::string& model_dir, const LabeledSet& test) const {
    std::map<std::string, std::vector<int>> out;
    const auto forest_path = path_of(model_dir + "model_random_forest.json");
    if (fs::exists(forest_path)) out["random_forest"] = predict(forest_from_json(read_json(forest_path)), test.x);
    const auto mlp_path = path_of(model_dir + "model_mlp.json");
    if (fs::exists(mlp_path)) out["mlp"] = predict(mlp_from_json(read_json(mlp_path)), test.x);
    return out;
  }

  void write_evaluation(const std::string& dir, const LabeledSet& test,
                        const std::map<std::string, std::vector<int>>& predictions) {
    json reports = json::object();
    std::string csv = "timestamp,truth";
    for (const auto& [name, p] : predictions) csv += "," + name;
    csv += "\n";
    for (std::size_t r = 0; r < test.size(); ++r) {
      append_int(csv, test.timestamps[r]);
      csv += ",";
      append_int(csv, test.y[r]);
      for (const auto& [name, p] : predictions) {
        csv += ",";
        append_int(csv, p[r]);
      }
      csv += "\n";
    }
    for (const auto& [name, p] : predictions) reports[name] = to_json(evaluate(p, test.y));
    put(dir + "/predictions.csv", csv);
    put_json(dir + "/eval.json", reports);
  }

  void evaluate_models(const std::string& dir) {
    const LabeledSet test = set_from("prepare", "test.csv");
    const auto predictions = predict_all(stage_dir(cfg_, "train") + "/", test);
    if (predictions.empty()) throw Error(Errc::FileUnreadable, "no trained model found");
    write_evaluation(dir, test, predictions);
  }

  // ---- baseline presets

  std::vector<std::string> baseline_branches() const {
    switch (cfg_.baseline.preset) {
      case BaselinePreset::scenario1: return {"detector"};
      case BaselinePreset::scenario2: return {"pca"};
      case BaselinePreset::scenario3: return {"ae_latent"};
      case BaselinePreset::scenario4: return {"pca", "ae_latent"};
      case BaselinePreset::none: break;
    }
    return {};
  }

  /// Minimal preparation: no expert selection, constant columns dropped,
  /// missing cells set to zero, labels without a transition buffer,
  /// standardization fit on train.
  void baseline_prepare(const std::string& dir) {
    SensorFrame raw = apply_exclusions(detail::load_raw_frame(cfg_), {}, cfg_.selection.keep_window);
    const EventLog log = load_event_log(cfg_.resolve(cfg_.events));
    const auto constants = detail::constant_columns(raw);
    const std::set<std::string> drop(constants.begin(), constants.end());
    if (drop.size() == raw.cols()) throw Error(Errc::AllColumnsDropped, "every column is constant");
    const SensorFrame frame = detail::missing_to_zero(raw.drop_columns(drop));

    LabelingConfig labeling;
    labeling.windows = {cfg_.labeling.windows.degraded, 0};
    labeling.warmup = 0;
    labeling.cooldown = 0;
    for (const auto& [mode, w] : cfg_.labeling.per_mode) labeling.per_mode[mode] = {w.degraded, 0};
    const LabelSequence labels = label_frame(log, frame, labeling);
    const StatePartition parts = partition_by_state(frame, labels, log);
    std::vector<const SensorFrame*> ptrs;
    for (const auto& [mode, f] : parts.degraded) ptrs.push_back(&f);
    if (ptrs.empty()) throw Error(Errc::DegradedEmpty, "no degraded rows after labeling");
    const SensorFrame degraded = concat_rows(ptrs);

    SplitSpec spec = cfg_.split;
    spec.balance = cfg_.baseline.preset == BaselinePreset::scenario4 ? BalanceMode::both : BalanceMode::test_only;
    spec.seed = sub_seed("baseline_prepare");
    DataSplits splits = balance_and_split(parts.healthy, degraded, spec);
    const auto degenerate = detail::degenerate_columns(splits.train);
    splits.train = detail::drop_features(splits.train, degenerate);
    splits.validation = detail::drop_features(splits.validation, degenerate);
    splits.test = detail::drop_features(splits.test, degenerate);
    const ScalerParams scaler = fit_scaler(splits.train, ScalerKind::standard);
    put_set(dir + "/train.csv", transform(splits.train, scaler));
    put_set(dir + "/validation.csv", transform(splits.validation, scaler));
    put_set(dir + "/test.csv", transform(splits.test, scaler));
    put_json(dir + "/scaler.json", to_json(scaler));
    json j = detail::split_summary(splits);
    j["constant_columns_dropped"] = constants;
    j["degenerate_in_train_dropped"] = degenerate;
    j["balance"] = to_string(spec.balance);
    j["labeling"] = to_json(labeling);
    put_json(dir + "/report.json", j);
  }

  void baseline_reduce(const std::string& dir) {
    const LabeledSet train_set = set_from("baseline_prepare", "train.csv");
    const LabeledSet validation = set_from("baseline_prepare", "validation.csv");
    const LabeledSet test = set_from("baseline_prepare", "test.csv");
    const PcaModel pca = fit_pca(train_set.x);
    const std::size_t k = select_components(pca, cfg_.baseline.pca_threshold);
    put(dir + "/explained_variance.csv", explained_variance_csv(pca));
    put_json(dir + "/pca.json", to_json(pca, k));
    json report{{"k", k}, {"cumulative_at_k", pca.cumulative_ratio()[k - 1]}, {"branches", baseline_branches()}};

    for (const auto& branch : baseline_branches()) {
      const std::string prefix = dir + "/" + branch + "/";
      if (branch == "pca") {
        put_set(prefix + "train.csv", detail::with_features(train_set, project(pca, k, train_set.x), "pc"));
        put_set(prefix + "validation.csv", detail::with_features(validation, project(pca, k, validation.x), "pc"));
        put_set(prefix + "test.csv", detail::with_features(test, project(pca, k, test.x), "pc"));
        continue;
      }
      // autoencoder with latent size k, fit without labels on a subsample of train
      std::vector<std::size_t> rows(train_set.size());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      if (rows.size() > cfg_.baseline.autoencoder_max_rows) {
        Rng rng(sub_seed("baseline_reduce.ae_rows"));
        rng.shuffle(rows);
        rows.resize(cfg_.baseline.autoencoder_max_rows);
        std::sort(rows.begin(), rows.end());
      }
      MlpParams ae_params = cfg_.baseline.autoencoder;
      ae_params.seed = sub_seed("baseline_reduce.ae");
      AeModel ae = train_autoencoder(train_set.x.select_rows(rows), k, ae_params);
      if (branch == "detector") {
        const auto errors = reconstruction_errors(ae, train_set.x);
        ae.threshold = choose_error_threshold(errors, train_set.y, cfg_.baseline.threshold_metric);
        put(prefix + "reconstruction_errors.csv", reconstruction_errors_csv(train_set, errors));
        report["threshold"] = ae.threshold;
      } else {
        put_set(prefix + "train.csv", detail::with_features(train_set, encode(ae, train_set.x), "z"));
        put_set(prefix + "validation.csv", detail::with_features(validation, encode(ae, validation.x), "z"));
        put_set(prefix + "test.csv", detail::with_features(test, encode(ae, test.x), "z"));
      }
      put_json(prefix + "autoencoder.json", to_json(ae));
    }
    put_json(dir + "/report.json", report);
  }

  void baseline_train(const std::string& dir) {
    json report = json::object();
    const bool forest_on = cfg_.baseline.classifier == "random_forest";
    for (const auto& branch : baseline_branches()) {
      if (branch == "detector") {
        report[branch] = "reconstruction-error threshold fit in baseline_reduce";
        continue;
      }
      const std::string src = stage_dir(cfg_, "baseline_reduce") + "/" + branch + "/";
      const LabeledSet train_set = load_labeled_set(path_of(src + "train.csv"));
      const LabeledSet validation = load_labeled_set(path_of(src + "validation.csv"));
      report[branch] = train_classifiers(dir + "/" + branch + "/", train_set, validation, forest_on, !forest_on,
                                         "baseline_train." + branch);
    }
    put_json(dir + "/report.json", report);
  }

  void baseline_evaluate(const std::string& dir) {
    json reports = json::object();
    std::string csv;
    for (const auto& branch : baseline_branches()) {
      const std::string reduce_dir = stage_dir(cfg_, "baseline_reduce") + "/" + branch + "/";
      if (branch == "detector") {
        const LabeledSet test = set_from("baseline_prepare", "test.csv");
        const AeModel ae = autoencoder_from_json(read_json(path_of(reduce_dir + "autoencoder.json")));
        const auto errors = reconstruction_errors(ae, test.x);
        put(dir + "/detector/test_reconstruction_errors.csv", reconstruction_errors_csv(test, errors));
        reports[branch] = {{"autoencoder", to_json(evaluate(classify_errors(errors, ae.threshold), test.y))}};
        continue;
      }
      const LabeledSet test = load_labeled_set(path_of(reduce_dir + "test.csv"));
      const auto predictions = predict_all(stage_dir(cfg_, "baseline_train") + "/" + branch + "/", test);
      json per_model = json::object();
      for (const auto& [name, p] : predictions) per_model[name] = to_json(evaluate(p, test.y));
      reports[branch] = per_model;
    }
    put_json(dir + "/eval.json", reports);
  }

  PipelineConfig cfg_;
  fs::path out_;
  Manifest header_;
  std::vector<std::string> written_;
};

/// Runs every stage of the configured plan into `out`.
inline void run_pipeline(const PipelineConfig& cfg, const fs::path& out) { PipelineRunner(cfg, out).run_all(); }

}  // namespace phmprep

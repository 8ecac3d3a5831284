#pragma once

// Versioned JSON pipeline configuration.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "phmprep/baselines/autoencoder.hpp"
#include "phmprep/core/error.hpp"
#include "phmprep/ingest.hpp"
#include "phmprep/labeler.hpp"
#include "phmprep/models/forest.hpp"
#include "phmprep/models/mlp.hpp"
#include "phmprep/models/search.hpp"
#include "phmprep/outlier.hpp"
#include "phmprep/pipeline/serialize.hpp"
#include "phmprep/prepare.hpp"
#include "phmprep/select.hpp"

namespace phmprep {

inline constexpr int kConfigVersion = 1;

enum class BaselinePreset { none, scenario1, scenario2, scenario3, scenario4 };

inline const char* to_string(BaselinePreset p) {
  switch (p) {
    case BaselinePreset::none: return "none";
    case BaselinePreset::scenario1: return "scenario1";
    case BaselinePreset::scenario2: return "scenario2";
    case BaselinePreset::scenario3: return "scenario3";
    case BaselinePreset::scenario4: return "scenario4";
  }
  return "?";
}

inline BaselinePreset parse_baseline_preset(const std::string& s) {
  for (auto p : {BaselinePreset::none, BaselinePreset::scenario1, BaselinePreset::scenario2, BaselinePreset::scenario3,
                 BaselinePreset::scenario4})
    if (s == to_string(p)) return p;
  throw Error(Errc::InvalidConfig, "unknown baseline preset " + s);
}

struct ForestSelection {
  bool enabled = true;
  ForestParams params;
  std::vector<ForestParams> grid;  // cross-validated when non-empty
  std::size_t folds = 5;
};

struct MlpSelection {
  bool enabled = true;
  MlpParams params;
  std::optional<MlpSearchSpace> search;  // random search on the validation set when present
  std::size_t draws = 10;
};

struct BaselineConfig {
  BaselinePreset preset = BaselinePreset::none;
  double pca_threshold = 0.90;
  std::string classifier = "random_forest";  // or "mlp"
  MlpParams autoencoder{{}, 0.01, 64, 30, 0};
  std::size_t autoencoder_max_rows = 20000;  // training subsample for speed
  ThresholdMetric threshold_metric = ThresholdMetric::accuracy;
};

struct PipelineConfig {
  int version = kConfigVersion;
  std::filesystem::path sensors;
  std::filesystem::path events;
  std::filesystem::path output;  // run directory when --out is not given
  std::string time_column = "timestamp";
  std::vector<CategoricalEncoding> encodings;
  SelectionConfig selection;
  CutoffSpec cutoffs;
  double cv_threshold = 0.05;
  double correlation_threshold = 0.95;
  LabelingConfig labeling;
  SplitSpec split;
  ScalerKind scaler = ScalerKind::standard;
  ForestSelection forest;
  MlpSelection mlp;
  BaselineConfig baseline;
  std::uint64_t seed = 42;
  std::filesystem::path base_dir;  // relative paths resolve against this; not serialized

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }

  void validate() const {
    if (version != kConfigVersion) throw Error(Errc::InvalidConfig, "unsupported config version " + std::to_string(version));
    if (sensors.empty() || events.empty()) throw Error(Errc::InvalidConfig, "paths.sensors and paths.events are required");
    auto unit = [](double v, const char* what, bool closed_top) {
      if (!(v >= 0.0 && (closed_top ? v <= 1.0 : v < 1.0))) throw Error(Errc::InvalidConfig, std::string(what) + " out of range");
    };
    unit(selection.column_threshold, "selection.column_nan_threshold", true);
    if (selection.row_threshold) unit(*selection.row_threshold, "selection.row_nan_threshold", true);
    if (!(cv_threshold >= 0.0)) throw Error(Errc::InvalidConfig, "reduction.cv_threshold must be >= 0");
    if (!(correlation_threshold > 0.0 && correlation_threshold < 1.0))
      throw Error(Errc::InvalidConfig, "reduction.correlation_threshold must lie in (0, 1)");
    if (!(baseline.pca_threshold > 0.0 && baseline.pca_threshold <= 1.0))
      throw Error(Errc::InvalidConfig, "baseline.pca_threshold must lie in (0, 1]");
    if (baseline.classifier != "random_forest" && baseline.classifier != "mlp")
      throw Error(Errc::InvalidConfig, "baseline.classifier must be random_forest or mlp");
    labeling.validate();
    if (baseline.preset == BaselinePreset::none && !forest.enabled && !mlp.enabled)
      throw Error(Errc::InvalidConfig, "no model enabled");
  }
};

inline json to_json(const MlpSearchSpace& s) {
  return {{"hidden_layer_sizes", s.hidden_layer_sizes},
          {"learning_rates", s.learning_rates},
          {"batch_sizes", s.batch_sizes},
          {"epochs", s.epochs}};
}

inline json to_json(const PipelineConfig& c) {
  json encodings = json::array();
  for (const auto& e : c.encodings)
    encodings.push_back({{"column", e.column},
                         {"mapping", e.mapping},
                         {"mode", e.mode == CategoricalEncoding::Mode::one_hot ? "one_hot" : "ordinal"}});
  json window = nullptr;
  if (c.selection.keep_window) {
    window = json::object();
    window["begin"] = c.selection.keep_window->begin ? json(*c.selection.keep_window->begin) : json(nullptr);
    window["end"] = c.selection.keep_window->end ? json(*c.selection.keep_window->end) : json(nullptr);
  }
  json grid = json::array();
  for (const auto& p : c.forest.grid) grid.push_back(to_json(p));
  return {{"version", c.version},
          {"seed", c.seed},
          {"paths", {{"sensors", c.sensors.generic_string()}, {"events", c.events.generic_string()},
                     {"output", c.output.generic_string()}, {"time_column", c.time_column}}},
          {"categorical", encodings},
          {"selection",
           {{"exclude", c.selection.exclude},
            {"keep_window", window},
            {"column_nan_threshold", c.selection.column_threshold},
            {"row_nan_threshold", optional_number(c.selection.row_threshold)}}},
          {"cutoffs", to_json(c.cutoffs)},
          {"reduction", {{"cv_threshold", c.cv_threshold}, {"correlation_threshold", c.correlation_threshold}}},
          {"labeling", to_json(c.labeling)},
          {"split",
           {{"test_fraction", c.split.test_fraction},
            {"validation_fraction", c.split.validation_fraction},
            {"balance", to_string(c.split.balance)}}},
          {"scaler", to_string(c.scaler)},
          {"models",
           {{"random_forest",
             {{"enabled", c.forest.enabled}, {"params", to_json(c.forest.params)}, {"grid", grid}, {"folds", c.forest.folds}}},
            {"mlp",
             {{"enabled", c.mlp.enabled},
              {"params", to_json(c.mlp.params)},
              {"search", c.mlp.search ? to_json(*c.mlp.search) : json(nullptr)},
              {"draws", c.mlp.draws}}}}},
          {"baseline",
           {{"preset", to_string(c.baseline.preset)},
            {"pca_threshold", c.baseline.pca_threshold},
            {"classifier", c.baseline.classifier},
            {"autoencoder", to_json(c.baseline.autoencoder)},
            {"autoencoder_max_rows", c.baseline.autoencoder_max_rows},
            {"threshold_metric", c.baseline.threshold_metric == ThresholdMetric::f1 ? "f1" : "accuracy"}}}};
}

/// Parses a config document; absent keys keep their defaults.
inline PipelineConfig pipeline_config_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  PipelineConfig c;
  c.base_dir = base_dir;
  try {
    c.version = j.value("version", kConfigVersion);
    c.seed = j.value("seed", c.seed);
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      c.sensors = p.value("sensors", "");
      c.events = p.value("events", "");
      c.output = p.value("output", "");
      c.time_column = p.value("time_column", c.time_column);
    }
    if (j.contains("categorical"))
      for (const auto& e : j.at("categorical")) {
        CategoricalEncoding enc;
        enc.column = e.at("column").get<std::string>();
        e.at("mapping").get_to(enc.mapping);
        enc.mode = e.value("mode", "ordinal") == "one_hot" ? CategoricalEncoding::Mode::one_hot
                                                           : CategoricalEncoding::Mode::ordinal;
        c.encodings.push_back(std::move(enc));
      }
    if (j.contains("selection")) {
      const auto& s = j.at("selection");
      if (s.contains("exclude")) s.at("exclude").get_to(c.selection.exclude);
      if (s.contains("keep_window") && !s.at("keep_window").is_null()) {
        TimeWindow w;
        const auto& kw = s.at("keep_window");
        auto instant = [](const json& v) -> std::optional<Timestamp> {
          if (v.is_null()) return std::nullopt;
          if (v.is_number_integer()) return v.get<Timestamp>();
          auto t = parse_instant(v.get<std::string>());
          if (!t) throw Error(Errc::InvalidConfig, "bad instant in keep_window");
          return t;
        };
        if (kw.contains("begin")) w.begin = instant(kw.at("begin"));
        if (kw.contains("end")) w.end = instant(kw.at("end"));
        c.selection.keep_window = w;
      }
      c.selection.column_threshold = s.value("column_nan_threshold", c.selection.column_threshold);
      if (s.contains("row_nan_threshold"))
        c.selection.row_threshold =
            s.at("row_nan_threshold").is_null() ? std::nullopt : std::optional<double>(s.at("row_nan_threshold").get<double>());
    }
    if (j.contains("cutoffs")) c.cutoffs = cutoff_spec_from_json(j.at("cutoffs"));
    if (j.contains("reduction")) {
      c.cv_threshold = j.at("reduction").value("cv_threshold", c.cv_threshold);
      c.correlation_threshold = j.at("reduction").value("correlation_threshold", c.correlation_threshold);
    }
    if (j.contains("labeling")) c.labeling = labeling_config_from_json(j.at("labeling"));
    if (j.contains("split")) {
      const auto& s = j.at("split");
      c.split.test_fraction = s.value("test_fraction", c.split.test_fraction);
      c.split.validation_fraction = s.value("validation_fraction", c.split.validation_fraction);
      c.split.balance = parse_balance_mode(s.value("balance", "both"));
    }
    if (j.contains("scaler")) c.scaler = parse_scaler_kind(j.at("scaler").get<std::string>());
    if (j.contains("models")) {
      const auto& m = j.at("models");
      if (m.contains("random_forest")) {
        const auto& f = m.at("random_forest");
        c.forest.enabled = f.value("enabled", true);
        if (f.contains("params")) c.forest.params = forest_params_from_json(f.at("params"));
        if (f.contains("grid"))
          for (const auto& g : f.at("grid")) c.forest.grid.push_back(forest_params_from_json(g, c.forest.params));
        c.forest.folds = f.value("folds", c.forest.folds);
      }
      if (m.contains("mlp")) {
        const auto& n = m.at("mlp");
        c.mlp.enabled = n.value("enabled", true);
        if (n.contains("params")) c.mlp.params = mlp_params_from_json(n.at("params"));
        if (n.contains("search") && !n.at("search").is_null()) {
          const auto& s = n.at("search");
          MlpSearchSpace space;
          s.at("hidden_layer_sizes").get_to(space.hidden_layer_sizes);
          s.at("learning_rates").get_to(space.learning_rates);
          s.at("batch_sizes").get_to(space.batch_sizes);
          s.at("epochs").get_to(space.epochs);
          c.mlp.search = std::move(space);
        }
        c.mlp.draws = n.value("draws", c.mlp.draws);
      }
    }
    if (j.contains("baseline")) {
      const auto& b = j.at("baseline");
      c.baseline.preset = parse_baseline_preset(b.value("preset", "none"));
      c.baseline.pca_threshold = b.value("pca_threshold", c.baseline.pca_threshold);
      c.baseline.classifier = b.value("classifier", c.baseline.classifier);
      if (b.contains("autoencoder")) c.baseline.autoencoder = mlp_params_from_json(b.at("autoencoder"), c.baseline.autoencoder);
      c.baseline.autoencoder_max_rows = b.value("autoencoder_max_rows", c.baseline.autoencoder_max_rows);
      c.baseline.threshold_metric = b.value("threshold_metric", "accuracy") == "f1" ? ThresholdMetric::f1 : ThresholdMetric::accuracy;
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
  c.validate();
  return c;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return pipeline_config_from_json(read_json(path), path.parent_path());
}

}  // namespace phmprep

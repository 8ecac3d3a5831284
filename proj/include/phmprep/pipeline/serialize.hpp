#pragma once

// JSON and CSV forms of reports, parameters and trained models.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "phmprep/baselines/autoencoder.hpp"
#include "phmprep/baselines/pca.hpp"
#include "phmprep/core/error.hpp"
#include "phmprep/core/text.hpp"
#include "phmprep/ingest.hpp"
#include "phmprep/labeler.hpp"
#include "phmprep/models/forest.hpp"
#include "phmprep/models/metrics.hpp"
#include "phmprep/models/mlp.hpp"
#include "phmprep/models/search.hpp"
#include "phmprep/outlier.hpp"
#include "phmprep/prepare.hpp"
#include "phmprep/reduce.hpp"
#include "phmprep/select.hpp"

namespace phmprep {

using nlohmann::json;

/// Stable two-space JSON with a trailing newline.
inline void write_json(const std::filesystem::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

inline json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedInput, path.string() + ": " + e.what());
  }
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---- reports

inline json to_json(const SelectionReport& r) {
  json dropped = json::array();
  for (const auto& [name, ratio] : r.dropped_columns) dropped.push_back({{"feature", name}, {"missing_ratio", ratio}});
  return {{"excluded_by_expert", r.excluded_by_expert},
          {"dropped_columns", dropped},
          {"dropped_row_count", r.dropped_row_count},
          {"rows_outside_window", r.rows_outside_window},
          {"remaining_rows", r.remaining_shape.first},
          {"remaining_columns", r.remaining_shape.second}};
}

inline json to_json(const OutlierReport& r) {
  json features = json::array();
  for (const auto& f : r.features)
    features.push_back({{"feature", f.name},
                        {"below", f.below},
                        {"above", f.above},
                        {"mean_before", f.mean_before},
                        {"std_before", f.std_before},
                        {"mean_after", f.mean_after},
                        {"std_after", f.std_after}});
  return {{"features", features}, {"rows_removed", r.rows_removed}};
}

inline json to_json(const LowVariabilityResult& r, double threshold) {
  json all = json::array(), dropped = json::array();
  for (const auto& e : r.all) all.push_back({{"feature", e.name}, {"cv", optional_number(e.cv)}});
  for (const auto& e : r.dropped) dropped.push_back(e.name);
  return {{"threshold", threshold}, {"dropped", dropped}, {"undefined_cv", r.undefined_cv}, {"cv", all}};
}

inline json to_json(const ReductionReport& r) {
  json groups = json::array();
  for (const auto& g : r.correlation_groups)
    groups.push_back({{"kept", g.kept}, {"dropped", g.dropped}, {"r_with_kept", g.r_with_kept}});
  json low = json::array();
  for (const auto& e : r.dropped_low_cv) low.push_back({{"feature", e.name}, {"cv", optional_number(e.cv)}});
  return {{"dropped_low_cv", low},
          {"undefined_cv", r.undefined_cv},
          {"correlation_groups", groups},
          {"final_features", r.final_features}};
}

/// Symmetric matrix with the feature names as header; undefined entries are empty.
inline std::string correlation_csv(const CorrelationMatrix& m) {
  std::string out = "feature";
  for (const auto& n : m.feature_names) out += "," + csv_escape(n);
  out += "\n";
  for (std::size_t i = 0; i < m.feature_names.size(); ++i) {
    out += csv_escape(m.feature_names[i]);
    for (std::size_t j = 0; j < m.feature_names.size(); ++j) {
      out += ",";
      if (!m.degenerate_pair[i][j]) append_double(out, m.r(i, j));
    }
    out += "\n";
  }
  return out;
}

inline json to_json(const EvalReport& r) {
  auto rate = [](const Rate& x) { return json{{"num", x.num}, {"den", x.den}, {"value", x.value()}}; };
  return {{"confusion", {{"tp", r.confusion.tp}, {"tn", r.confusion.tn}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}}},
          {"accuracy", rate(r.accuracy)},
          {"false_healthy", rate(r.false_healthy)},
          {"false_degraded", rate(r.false_degraded)},
          {"recall", rate(r.recall)},
          {"precision", rate(r.precision)},
          {"f1", r.f1}};
}

inline EvalReport eval_report_from_json(const json& j) {
  const auto& c = j.at("confusion");
  return report_from_confusion(
      {c.at("tp").get<std::size_t>(), c.at("tn").get<std::size_t>(), c.at("fp").get<std::size_t>(),
       c.at("fn").get<std::size_t>()});
}

// ---- configuration pieces

inline json to_json(const CutoffSpec& spec) {
  json out = json::object();
  for (const auto& [name, b] : spec) out[name] = {{"lower", optional_number(b.lower)}, {"upper", optional_number(b.upper)}};
  return out;
}

inline CutoffSpec cutoff_spec_from_json(const json& j) {
  CutoffSpec spec;
  for (const auto& [name, b] : j.items()) {
    Bounds bounds;
    if (b.contains("lower") && !b.at("lower").is_null()) bounds.lower = b.at("lower").get<double>();
    if (b.contains("upper") && !b.at("upper").is_null()) bounds.upper = b.at("upper").get<double>();
    spec[name] = bounds;
  }
  return spec;
}

inline json to_json(const LabelWindows& w) {
  return {{"degraded_window", w.degraded}, {"transition_window", w.transition}};
}

inline LabelWindows label_windows_from_json(const json& j, LabelWindows fallback = {}) {
  fallback.degraded = j.value("degraded_window", fallback.degraded);
  fallback.transition = j.value("transition_window", fallback.transition);
  return fallback;
}

inline json to_json(const LabelingConfig& cfg) {
  json j = to_json(cfg.windows);
  j["warmup"] = cfg.warmup;
  j["cooldown"] = cfg.cooldown;
  j["operation_signal"] = cfg.operation_signal
                              ? json{{"feature", cfg.operation_signal->feature}, {"threshold", cfg.operation_signal->threshold}}
                              : json(nullptr);
  json modes = json::object();
  for (const auto& [mode, w] : cfg.per_mode) modes[mode] = to_json(w);
  j["per_mode"] = modes;
  return j;
}

inline LabelingConfig labeling_config_from_json(const json& j) {
  LabelingConfig cfg;
  cfg.windows = label_windows_from_json(j, cfg.windows);
  cfg.warmup = j.value("warmup", cfg.warmup);
  cfg.cooldown = j.value("cooldown", cfg.cooldown);
  if (j.contains("operation_signal") && !j.at("operation_signal").is_null()) {
    const auto& s = j.at("operation_signal");
    cfg.operation_signal = OperationSignal{s.at("feature").get<std::string>(), s.value("threshold", 0.0)};
  }
  if (j.contains("per_mode"))
    for (const auto& [mode, w] : j.at("per_mode").items()) cfg.per_mode[mode] = label_windows_from_json(w, cfg.windows);
  return cfg;
}

inline const char* to_string(BalanceMode m) {
  switch (m) {
    case BalanceMode::both: return "both";
    case BalanceMode::test_only: return "test_only";
    case BalanceMode::none: return "none";
  }
  return "?";
}

inline BalanceMode parse_balance_mode(const std::string& s) {
  if (s == "both") return BalanceMode::both;
  if (s == "test_only") return BalanceMode::test_only;
  if (s == "none") return BalanceMode::none;
  throw Error(Errc::InvalidConfig, "unknown balance mode " + s);
}

// ---- labels

inline std::string labels_csv(const SensorFrame& frame, const LabelSequence& labels, const EventLog& log) {
  std::string out = "timestamp,state,event,failure_mode\n";
  for (std::size_t r = 0; r < labels.labels.size(); ++r) {
    const Label& l = labels.labels[r];
    append_int(out, frame.timestamps()[r]);
    out += ",";
    out += to_string(l.state);
    out += ",";
    append_int(out, l.event);
    out += ",";
    if (l.event >= 0) {
      const auto& rec = log.records[static_cast<std::size_t>(l.event)];
      if (rec.failure_mode) out += csv_escape(*rec.failure_mode);
    }
    out += "\n";
  }
  return out;
}

inline HealthState parse_health_state(std::string_view s) {
  if (s == "healthy") return HealthState::healthy;
  if (s == "transition") return HealthState::transition;
  if (s == "degraded") return HealthState::degraded;
  if (s == "excluded") return HealthState::excluded;
  throw Error(Errc::MalformedInput, "unknown health state " + std::string(s));
}

/// Reads labels.csv back, checking it matches the frame row for row.
inline LabelSequence load_labels(const std::filesystem::path& path, const SensorFrame& frame) {
  const std::string text = read_file(path);
  LineCursor lines(text);
  std::string_view line;
  std::vector<std::string> fields;
  lines.next(line);
  LabelSequence seq;
  while (lines.next(line)) {
    if (line.empty()) continue;
    split_csv_line(line, fields);
    if (fields.size() < 3) throw Error(Errc::MalformedInput, path.string());
    const std::size_t r = seq.labels.size();
    auto t = parse_int64(fields[0]);
    auto event = parse_int64(fields[2]);
    if (!t || !event || r >= frame.rows() || *t != frame.timestamps()[r])
      throw Error(Errc::LengthMismatch, path.string() + " does not match the frame at line " +
                                            std::to_string(lines.line_number()));
    seq.labels.push_back({parse_health_state(fields[1]), static_cast<std::int32_t>(*event)});
  }
  if (seq.labels.size() != frame.rows()) throw Error(Errc::LengthMismatch, path.string());
  return seq;
}

inline std::string intervals_csv(const OperationalIntervals& iv, const EventLog& log) {
  std::string out = "begin,end,terminating_event,kind,failure_mode\n";
  for (const auto& i : iv.intervals) {
    append_int(out, i.begin);
    out += ",";
    append_int(out, i.end);
    out += ",";
    if (i.terminating_event) {
      const auto& rec = log.records[*i.terminating_event];
      append_int(out, static_cast<std::int64_t>(*i.terminating_event));
      out += ",";
      out += to_string(rec.kind);
      out += ",";
      if (rec.failure_mode) out += csv_escape(*rec.failure_mode);
    } else {
      out += ",end_of_data,";
    }
    out += "\n";
  }
  return out;
}

// ---- labeled sets

inline constexpr const char* kLabelColumn = "label";

inline void write_labeled_set(const LabeledSet& set, const std::filesystem::path& path) {
  std::string out = "timestamp";
  for (const auto& n : set.feature_names) out += "," + csv_escape(n);
  out += ",";
  out += kLabelColumn;
  out += "\n";
  for (std::size_t r = 0; r < set.size(); ++r) {
    append_int(out, set.timestamps[r]);
    for (double v : set.x.row(r)) {
      out += ",";
      append_double(out, v);
    }
    out += ",";
    append_int(out, set.y[r]);
    out += "\n";
  }
  write_file(path, out);
}

inline LabeledSet load_labeled_set(const std::filesystem::path& path) {
  const SensorFrame frame = load_sensor_frame(path);
  const auto label_col = frame.find(kLabelColumn);
  if (!label_col) throw Error(Errc::ColumnNotFound, std::string(kLabelColumn) + " in " + path.string());
  LabeledSet set;
  for (std::size_t c = 0; c < frame.cols(); ++c)
    if (c != *label_col) set.feature_names.push_back(frame.feature_names()[c]);
  set.x = Matrix(0, set.feature_names.size());
  std::vector<double> row;
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    row.clear();
    for (std::size_t c = 0; c < frame.cols(); ++c)
      if (c != *label_col) row.push_back(frame.at(r, c));
    set.x.append_row(row);
    set.y.push_back(frame.at(r, *label_col) != 0.0 ? 1 : 0);
    set.timestamps.push_back(frame.timestamps()[r]);
  }
  return set;
}

// ---- scaler

inline json to_json(const ScalerParams& p) {
  json features = json::array();
  for (const auto& f : p.features)
    features.push_back({{"name", f.name}, {"offset", f.offset}, {"scale", f.scale}, {"exempt", f.exempt}});
  return {{"kind", to_string(p.kind)}, {"features", features}};
}

inline ScalerParams scaler_from_json(const json& j) {
  ScalerParams p;
  p.kind = parse_scaler_kind(j.at("kind").get<std::string>());
  for (const auto& f : j.at("features"))
    p.features.push_back({f.at("name").get<std::string>(), f.at("offset").get<double>(), f.at("scale").get<double>(),
                          f.value("exempt", false)});
  return p;
}

// ---- models

inline json to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"max_depth", p.max_depth == kUnlimitedDepth ? json(nullptr) : json(p.max_depth)},
          {"min_samples_leaf", p.min_samples_leaf},
          {"features_per_split", p.features_per_split},
          {"seed", p.seed}};
}

inline ForestParams forest_params_from_json(const json& j, ForestParams p = {}) {
  p.n_trees = j.value("n_trees", p.n_trees);
  if (j.contains("max_depth")) p.max_depth = j.at("max_depth").is_null() ? kUnlimitedDepth : j.at("max_depth").get<int>();
  p.min_samples_leaf = j.value("min_samples_leaf", p.min_samples_leaf);
  p.features_per_split = j.value("features_per_split", p.features_per_split);
  p.seed = j.value("seed", p.seed);
  p.threads = j.value("threads", p.threads);
  return p;
}

inline json to_json(const ForestModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    trees.push_back(nodes);
  }
  return {{"type", "random_forest"}, {"params", to_json(m.params)}, {"n_features", m.n_features}, {"trees", trees}};
}

inline ForestModel forest_from_json(const json& j) {
  ForestModel m;
  m.params = forest_params_from_json(j.at("params"));
  m.n_features = j.at("n_features").get<std::size_t>();
  for (const auto& t : j.at("trees")) {
    DecisionTree tree;
    for (const auto& n : t)
      tree.nodes.push_back({n.at(0).get<std::int32_t>(), n.at(1).get<double>(), n.at(2).get<std::int32_t>(),
                            n.at(3).get<std::int32_t>(), n.at(4).get<double>()});
    m.trees.push_back(std::move(tree));
  }
  return m;
}

inline json to_json(const MlpParams& p) {
  return {{"hidden_layer_sizes", p.hidden_layer_sizes},
          {"learning_rate", p.learning_rate},
          {"batch_size", p.batch_size},
          {"epochs", p.epochs},
          {"seed", p.seed}};
}

inline MlpParams mlp_params_from_json(const json& j, MlpParams p = {}) {
  if (j.contains("hidden_layer_sizes")) j.at("hidden_layer_sizes").get_to(p.hidden_layer_sizes);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.batch_size = j.value("batch_size", p.batch_size);
  p.epochs = j.value("epochs", p.epochs);
  p.seed = j.value("seed", p.seed);
  return p;
}

inline json to_json(const Network& net) {
  json layers = json::array();
  for (const auto& s : net.shapes()) layers.push_back({{"in", s.in}, {"out", s.out}, {"activation", to_string(s.activation)}});
  return {{"layers", layers}, {"parameters", net.parameters()}};
}

inline Network network_from_json(const json& j) {
  std::vector<LayerShape> shapes;
  for (const auto& l : j.at("layers"))
    shapes.push_back({l.at("in").get<std::size_t>(), l.at("out").get<std::size_t>(),
                      parse_activation(l.at("activation").get<std::string>())});
  return Network(std::move(shapes), j.at("parameters").get<std::vector<double>>());
}

inline json to_json(const MlpModel& m) {
  return {{"type", "mlp"}, {"params", to_json(m.params)}, {"network", to_json(m.net)}, {"warnings", m.warnings}};
}

inline MlpModel mlp_from_json(const json& j) {
  MlpModel m;
  m.params = mlp_params_from_json(j.at("params"));
  m.net = network_from_json(j.at("network"));
  if (j.contains("warnings")) j.at("warnings").get_to(m.warnings);
  return m;
}

inline std::string curves_csv(const std::vector<EpochRecord>& curve) {
  std::string out = "epoch,train_loss,val_loss,train_acc,val_acc\n";
  for (const auto& e : curve) {
    append_int(out, static_cast<std::int64_t>(e.epoch));
    for (double v : {e.train_loss, e.val_loss, e.train_acc, e.val_acc}) {
      out += ",";
      append_double(out, v);
    }
    out += "\n";
  }
  return out;
}

inline json to_json(const AeModel& m) {
  return {{"type", "autoencoder"},
          {"latent_dim", m.latent_dim},
          {"threshold", m.threshold},
          {"network", to_json(m.net)},
          {"loss_curve", m.loss_curve}};
}

inline AeModel autoencoder_from_json(const json& j) {
  AeModel m;
  m.latent_dim = j.at("latent_dim").get<std::size_t>();
  m.threshold = j.at("threshold").get<double>();
  m.net = network_from_json(j.at("network"));
  if (j.contains("loss_curve")) j.at("loss_curve").get_to(m.loss_curve);
  return m;
}

inline json to_json(const PcaModel& m, std::size_t k) {
  json components = json::array();
  for (std::size_t j = 0; j < k; ++j) {
    auto row = m.components.row(j);
    components.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"type", "pca"},
          {"k", k},
          {"mean", m.mean},
          {"eigenvalues", m.eigenvalues},
          {"explained_variance_ratio", m.explained_variance_ratio},
          {"components", components}};
}

/// Restores the first k directions, which is all projection needs.
inline std::pair<PcaModel, std::size_t> pca_from_json(const json& j) {
  PcaModel m;
  const auto k = j.at("k").get<std::size_t>();
  j.at("mean").get_to(m.mean);
  j.at("eigenvalues").get_to(m.eigenvalues);
  j.at("explained_variance_ratio").get_to(m.explained_variance_ratio);
  m.components = Matrix(k, m.mean.size());
  for (std::size_t r = 0; r < k; ++r) {
    const auto row = j.at("components").at(r).get<std::vector<double>>();
    std::copy(row.begin(), row.end(), m.components.row(r).begin());
  }
  return {std::move(m), k};
}

inline std::string explained_variance_csv(const PcaModel& m) {
  std::string out = "component,ratio,cumulative\n";
  const auto cum = m.cumulative_ratio();
  for (std::size_t j = 0; j < cum.size(); ++j) {
    append_int(out, static_cast<std::int64_t>(j + 1));
    out += ",";
    append_double(out, m.explained_variance_ratio[j]);
    out += ",";
    append_double(out, cum[j]);
    out += "\n";
  }
  return out;
}

inline std::string reconstruction_errors_csv(const LabeledSet& set, const std::vector<double>& errors) {
  std::string out = "timestamp,error,label\n";
  for (std::size_t r = 0; r < set.size(); ++r) {
    append_int(out, set.timestamps[r]);
    out += ",";
    append_double(out, errors[r]);
    out += ",";
    append_int(out, set.y[r]);
    out += "\n";
  }
  return out;
}

}  // namespace phmprep

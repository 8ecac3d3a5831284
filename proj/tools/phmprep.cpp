// phmprep command line: synthetic scenarios, diagnostics, and the staged
// preprocessing pipeline.
//
// Exit status: 0 success, 1 usage, 2 data error, 3 internal error.

#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "phmprep/outlier.hpp"
#include "phmprep/pipeline/config.hpp"
#include "phmprep/pipeline/manifest.hpp"
#include "phmprep/pipeline/scenario.hpp"
#include "phmprep/pipeline/stages.hpp"
#include "phmprep/select.hpp"
#include "phmprep/synth.hpp"

namespace fs = std::filesystem;
using namespace phmprep;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "pipeline config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--seed", c.seed, "master seed, overrides the config");
}

PipelineConfig load_config(const Common& c) {
  if (c.config.empty()) throw UsageError("--config is required");
  PipelineConfig cfg = load_pipeline_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

fs::path run_dir(const Common& c, const PipelineConfig& cfg) {
  if (!c.out.empty()) return c.out;
  if (!cfg.output.empty()) return cfg.resolve(cfg.output);
  throw UsageError("--out is required when the config has no paths.output");
}

int cmd_synth(const Common& c) {
  if (c.out.empty()) throw UsageError("--out is required");
  SynthConfig synth = c.config.empty() ? default_synth_config() : synth_config_from_json(read_json(c.config));
  if (c.seed) synth.seed = *c.seed;
  const Scenario s = generate_scenario(synth);
  fs::create_directories(c.out);
  const ScenarioFiles files = write_scenario(s, synth, c.out);
  std::cout << "rows " << s.frame.rows() << ", channels " << s.frame.cols() << ", events " << s.log.records.size()
            << "\n"
            << "wrote " << files.sensors.string() << ", " << files.events.string() << ", "
            << files.truth.string() << ", " << files.pipeline_config.string() << "\n";
  return kOk;
}

int cmd_inspect(const Common& c, const std::string& sensors, const std::string& time_column) {
  if (c.out.empty()) throw UsageError("--out is required");
  SensorFrame frame;
  if (!sensors.empty()) {
    frame = load_sensor_frame(sensors, time_column);
  } else {
    const PipelineConfig cfg = load_config(c);
    frame = run_selection(detail::load_raw_frame(cfg), cfg.selection).first;
  }
  const auto written = emit_diagnostics(frame, c.out);
  std::cout << "wrote " << written.size() << " files to " << c.out << "\n";
  return kOk;
}

int cmd_stages(const Common& c, const std::string& group) {
  const PipelineConfig cfg = load_config(c);
  PipelineRunner runner(cfg, run_dir(c, cfg));
  std::size_t n = 0;
  if (group.empty()) {
    runner.run_all();
    n = stage_plan(cfg).size();
  } else {
    n = runner.run_group(group);
  }
  std::cout << "ran " << n << " stage(s) into " << runner.output().string() << "\n";
  return kOk;
}

void print_eval(const std::string& prefix, const json& r) {
  const EvalReport e = eval_report_from_json(r);
  std::cout << "  " << prefix << ": accuracy " << format_double(e.accuracy.value()) << ", false_healthy "
            << format_double(e.false_healthy.value()) << ", false_degraded " << format_double(e.false_degraded.value())
            << ", f1 " << format_double(e.f1) << "\n";
}

int cmd_report(const Common& c) {
  fs::path dir = c.out;
  if (dir.empty()) {
    if (c.config.empty()) throw UsageError("--out or --config is required");
    const PipelineConfig cfg = load_config(c);
    dir = run_dir(c, cfg);
  }
  if (!fs::exists(dir / kManifestFile)) throw Error(Errc::FileUnreadable, (dir / kManifestFile).string());
  const Manifest m = load_manifest(dir);
  std::cout << "run " << dir.string() << "\n"
            << "config " << m.config_sha256 << "\n"
            << "seed " << m.seed << ", preset " << m.preset << "\n"
            << "manifest " << sha256_file(dir / kManifestFile) << "\n";
  for (const auto& s : m.stages) std::cout << "  " << s.index << " " << s.name << " (" << s.files.size() << " files)\n";
  for (const auto& s : m.stages) {
    if (s.name != "evaluate" && s.name != "baseline_evaluate") continue;
    const fs::path eval = dir / stage_dir(StageInfo{s.index, s.name.c_str(), ""}) / "eval.json";
    if (!fs::exists(eval)) continue;
    const json j = read_json(eval);
    std::cout << "evaluation\n";
    for (const auto& [key, value] : j.items()) {
      if (value.contains("accuracy")) {
        print_eval(key, value);
      } else {
        for (const auto& [model, r] : value.items()) print_eval(key + "/" + model, r);
      }
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preprocessing pipeline for sensor monitoring data"};
  app.require_subcommand(1);

  Common common;
  std::string sensors, time_column = "timestamp";

  auto* synth = app.add_subcommand("synth", "generate a synthetic scenario");
  add_common(synth, common, false);
  auto* inspect = app.add_subcommand("inspect", "write per-feature series and boxplot summaries");
  add_common(inspect, common, false);
  inspect->add_option("--sensors", sensors, "sensor CSV to inspect instead of the configured one");
  inspect->add_option("--time-column", time_column, "timestamp column of --sensors");

  std::map<CLI::App*, std::string> groups;
  for (const char* g : {"select", "reduce", "label", "prepare", "train", "evaluate"}) {
    auto* cmd = app.add_subcommand(g, std::string("run the ") + g + " stages");
    add_common(cmd, common, true);
    groups[cmd] = g;
  }
  auto* pipeline = app.add_subcommand("pipeline", "run every stage");
  add_common(pipeline, common, true);
  auto* report = app.add_subcommand("report", "print the manifest and evaluation of a run");
  add_common(report, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(common);
    if (inspect->parsed()) return cmd_inspect(common, sensors, time_column);
    if (pipeline->parsed()) return cmd_stages(common, "");
    if (report->parsed()) return cmd_report(common);
    for (const auto& [cmd, g] : groups)
      if (cmd->parsed()) return cmd_stages(common, g);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

#pragma once

// Writes a generated scenario in the ingest formats together with its ground
// truth and a pipeline config tuned to it.

#include <filesystem>

#include "phmprep/pipeline/config.hpp"
#include "phmprep/pipeline/serialize.hpp"
#include "phmprep/synth.hpp"

namespace phmprep {

/// Pipeline settings an engineer would arrive at for this scenario: unrelated
/// channels excluded, cutoffs at the nominal bounds, the generator's windows
/// and the motor current as operation signal.
inline PipelineConfig pipeline_config_for(const SynthConfig& synth, const GroundTruth& truth) {
  PipelineConfig cfg;
  cfg.sensors = "sensors.csv";
  cfg.events = "events.csv";
  cfg.seed = synth.seed;
  cfg.selection.exclude.insert(truth.unrelated_channels.begin(), truth.unrelated_channels.end());
  cfg.cutoffs = truth.nominal_bounds;
  for (const auto& name : truth.unrelated_channels) cfg.cutoffs.erase(name);
  cfg.labeling.windows = {synth.degradation.degraded_window, synth.degradation.transition_window};
  cfg.labeling.operation_signal = OperationSignal{truth.operation_signal, 0.0};
  return cfg;
}

struct ScenarioFiles {
  std::filesystem::path sensors, events, truth, synth_config, pipeline_config;
};

inline ScenarioFiles write_scenario(const Scenario& s, const SynthConfig& synth, const std::filesystem::path& dir) {
  ScenarioFiles files{dir / "sensors.csv", dir / "events.csv", dir / "ground_truth.json", dir / "synth_config.json",
                      dir / "pipeline.json"};
  write_sensor_frame(s.frame, files.sensors);
  write_event_log(s.log, files.events);
  write_json(files.truth, to_json(s.truth, s.frame));
  write_json(files.synth_config, to_json(synth));
  write_json(files.pipeline_config, to_json(pipeline_config_for(synth, s.truth)));
  return files;
}

}  // namespace phmprep

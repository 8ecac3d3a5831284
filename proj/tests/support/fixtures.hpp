#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "phmprep/core/text.hpp"
#include "phmprep/pipeline/scenario.hpp"
#include "phmprep/synth.hpp"

namespace testing_support {

/// The default generator layout over a shorter horizon with fewer events.
inline phmprep::SynthConfig small_scenario_config(std::uint64_t seed = 7) {
  phmprep::SynthConfig c = phmprep::default_synth_config(seed);
  c.duration_hours = 400;
  c.schedule_spec.failures = 4;
  c.schedule_spec.normal_stops = 4;
  c.schedule_spec.pauses = 2;
  return c;
}

/// Writes a scenario into `dir` and returns its pipeline config, loaded back
/// from disk the way the command line would.
inline phmprep::PipelineConfig write_small_scenario(const std::filesystem::path& dir, std::uint64_t seed = 7) {
  const phmprep::SynthConfig synth = small_scenario_config(seed);
  const auto files = phmprep::write_scenario(phmprep::generate_scenario(synth), synth, dir);
  phmprep::PipelineConfig cfg = phmprep::load_pipeline_config(files.pipeline_config);
  cfg.forest.params.n_trees = 30;
  cfg.mlp.params.epochs = 10;
  return cfg;
}

/// Relative path -> file contents for every regular file under `dir`.
inline std::map<std::string, std::string> directory_contents(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).generic_string()] = phmprep::read_file(e.path());
  return out;
}

}  // namespace testing_support

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nprsim/countermeasures.hpp"
#include "nprsim/plant.hpp"

namespace nprsim {

/// Sensor and acoustic path shared by the scenario's attacks.
struct SensorSpec {
  DpsModel model;
  PathModel path;
};

/// A parsed scenario file.
struct ScenarioFile {
  NprScenario scenario;
  SensorSpec sensor;
  std::vector<Countermeasure> countermeasures;
  std::filesystem::path origin;
};

/// Parses a JSON scenario. Unknown keys, bad values and unknown archetypes raise ConfigError
/// carrying the line of the offending entry. Relative WAV paths resolve against `base_dir`.
ScenarioFile parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
ScenarioFile load_scenario(const std::filesystem::path& path);

}  // namespace nprsim

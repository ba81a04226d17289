#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nprsim/sensor.hpp"

namespace nprsim {

/// Environment variable naming a directory that holds `archetypes.json`.
inline constexpr const char* kArchetypeDirEnv = "NPRSIM_ARCHETYPE_DIR";

/// The eight characterized sensors, calibrated with the default damping (xi = 1).
std::vector<DpsModel> builtin_archetypes();

/// Parses an archetype file: a JSON array with one record per sensor.
std::vector<DpsModel> load_archetypes(const std::filesystem::path& path);
std::vector<DpsModel> parse_archetypes(const std::string& text);

/// Archetypes from $NPRSIM_ARCHETYPE_DIR/archetypes.json when set, built-ins otherwise.
std::vector<DpsModel> default_archetypes();

/// Looks `part_id` up in `pool`; throws ValidationError listing known ids when absent.
const DpsModel& find_archetype(const std::vector<DpsModel>& pool, const std::string& part_id);
DpsModel archetype(const std::string& part_id);

}  // namespace nprsim

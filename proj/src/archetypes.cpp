#include "nprsim/archetypes.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nprsim/errors.hpp"

namespace nprsim {

std::vector<DpsModel> builtin_archetypes() {
  using T = Transducer;
  std::vector<DpsModel> out;
  auto add = [&](const char* id, T t, Interval range, Interval band, bool reported = true) {
    auto m = DpsModel::calibrated(id, t, range, band);
    m.band_reported = reported;
    out.push_back(std::move(m));
  };
  add("P1K-2-2X16PA", T::piezoresistive, {0.0, 500.0}, {790.0, 800.0});
  add("MPVZ5004GW7U", T::piezoresistive, {0.0, 3920.0}, {1750.0, 1800.0});
  add("SDP810-250PA", T::thermal_mass_flow, {-250.0, 250.0}, {760.0, 780.0});
  add("SDP810-500PA", T::thermal_mass_flow, {-500.0, 500.0}, {870.0, 890.0});
  // Not found below 40 kHz; stiff high-range diaphragms, band placed above the sweep.
  add("TBPDPNS100PGUCV", T::piezoresistive, {0.0, 689000.0}, {95500.0, 96500.0}, false);
  add("P993-1B", T::capacitive, {-248.0, 248.0}, {740.0, 750.0});
  add("NSCSS015PDUNV", T::piezoresistive, {-103000.0, 103000.0}, {63500.0, 64500.0}, false);
  add("A1011-00", T::piezoresistive, {0.0, 60.0}, {680.0, 690.0});
  return out;
}

namespace {

Interval interval_of(const nlohmann::json& j, const char* key, std::size_t idx) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 2)
    throw ConfigError("archetype #" + std::to_string(idx) + ": '" + key + "' must be [lo, hi]");
  return {a[0].get<double>(), a[1].get<double>()};
}

}  // namespace

std::vector<DpsModel> parse_archetypes(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("archetype file: ") + e.what());
  }
  if (!doc.is_array()) throw ConfigError("archetype file must hold a JSON array");

  static const std::vector<std::string> known = {"part_id", "transducer", "pressure_range_pa",
                                                 "resonant_band_hz", "band_reported",
                                                 "manufacturer", "damping_ratio"};
  std::vector<DpsModel> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& rec = doc[i];
    if (!rec.is_object()) throw ConfigError("archetype #" + std::to_string(i) + " is not an object");
    for (const auto& [k, v] : rec.items()) {
      if (std::find(known.begin(), known.end(), k) == known.end())
        throw ConfigError("archetype #" + std::to_string(i) + ": unknown key '" + k + "'");
    }
    try {
      auto m = DpsModel::calibrated(rec.at("part_id").get<std::string>(),
                                    transducer_from_string(rec.at("transducer").get<std::string>()),
                                    interval_of(rec, "pressure_range_pa", i),
                                    interval_of(rec, "resonant_band_hz", i),
                                    rec.value("damping_ratio", 1.0));
      m.band_reported = rec.value("band_reported", true);
      out.push_back(std::move(m));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("archetype #" + std::to_string(i) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ConfigError("archetype #" + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<DpsModel> load_archetypes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open archetype file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_archetypes(ss.str());
}

std::vector<DpsModel> default_archetypes() {
  if (const char* dir = std::getenv(kArchetypeDirEnv); dir != nullptr && *dir != '\0')
    return load_archetypes(std::filesystem::path(dir) / "archetypes.json");
  return builtin_archetypes();
}

const DpsModel& find_archetype(const std::vector<DpsModel>& pool, const std::string& part_id) {
  for (const auto& m : pool)
    if (m.part_id == part_id) return m;
  std::string ids;
  for (const auto& m : pool) ids += (ids.empty() ? "" : ", ") + m.part_id;
  throw ValidationError("unknown sensor archetype '" + part_id + "' (known: " + ids + ")");
}

DpsModel archetype(const std::string& part_id) {
  return find_archetype(default_archetypes(), part_id);
}

}  // namespace nprsim

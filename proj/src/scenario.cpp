#include "nprsim/scenario.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nprsim/archetypes.hpp"
#include "nprsim/errors.hpp"

namespace nprsim {
namespace {

using json = nlohmann::json;

// Maps JSON pointers (/attacks/0/port) to the 1-based line where the entry starts.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) : s_(text) {
    skip();
    value("");
  }

  int line(const std::string& pointer) const {
    std::string p = pointer;
    while (true) {
      if (auto it = lines_.find(p); it != lines_.end()) return it->second;
      const auto cut = p.rfind('/');
      if (cut == std::string::npos || p.empty()) return 1;
      p.resize(cut);
    }
  }

 private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
      if (s_[i_] == '\n') ++line_;
      ++i_;
    }
  }

  std::string string() {
    std::string out;
    ++i_;  // opening quote
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\') ++i_;
      if (i_ < s_.size()) out += s_[i_++];
    }
    ++i_;
    return out;
  }

  void value(const std::string& ptr) {
    lines_.emplace(ptr, line_);
    if (i_ >= s_.size()) return;
    const char c = s_[i_];
    if (c == '{') {
      ++i_;
      skip();
      while (i_ < s_.size() && s_[i_] != '}') {
        const int key_line = line_;
        const std::string key = string();
        lines_.emplace(ptr + "/" + key, key_line);
        skip();
        ++i_;  // colon
        skip();
        value(ptr + "/" + key);
        lines_[ptr + "/" + key] = key_line;
        skip();
        if (i_ < s_.size() && s_[i_] == ',') ++i_;
        skip();
      }
      ++i_;
    } else if (c == '[') {
      ++i_;
      skip();
      for (std::size_t k = 0; i_ < s_.size() && s_[i_] != ']'; ++k) {
        value(ptr + "/" + std::to_string(k));
        skip();
        if (i_ < s_.size() && s_[i_] == ',') ++i_;
        skip();
      }
      ++i_;
    } else if (c == '"') {
      string();
    } else {
      while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' &&
             !std::isspace(static_cast<unsigned char>(s_[i_])))
        ++i_;
    }
  }

  const std::string& s_;
  std::size_t i_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

// Object view that records consumed keys and rejects the rest.
class Obj {
 public:
  Obj(const json& j, std::string ptr, const LineIndex& lines)
      : j_(j), ptr_(std::move(ptr)), lines_(lines) {
    if (!j.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& msg, const std::string& key = "") const {
    const std::string p = key.empty() ? ptr_ : ptr_ + "/" + key;
    throw ConfigError((p.empty() ? std::string("/") : p) + ": " + msg, lines_.line(p));
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail("missing required key '" + key + "'");
    return j_.at(key);
  }

  double num(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail("expected a number", key);
    return v.get<double>();
  }
  double num(const std::string& key, double fallback) { return has(key) ? num(key) : fallback; }

  std::string str(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail("expected a string", key);
    return v.get<std::string>();
  }
  std::string str(const std::string& key, const std::string& fallback) {
    return has(key) ? str(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail("expected true or false", key);
    return v.get<bool>();
  }

  Interval interval(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail("expected [lo, hi]", key);
    return {v[0].get<double>(), v[1].get<double>()};
  }

  Obj child(const std::string& key) {
    raw(key);
    return Obj(j_.at(key), ptr_ + "/" + key, lines_);
  }

  std::vector<Obj> children(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) fail("expected an array", key);
    std::vector<Obj> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      out.emplace_back(v[i], ptr_ + "/" + key + "/" + std::to_string(i), lines_);
    return out;
  }

  /// Rejects keys that were never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.contains(it.key())) fail("unknown key '" + it.key() + "'", it.key());
  }

  const std::string& ptr() const { return ptr_; }
  const json& json_value() const { return j_; }

 private:
  const json& j_;
  std::string ptr_;
  const LineIndex& lines_;
  std::set<std::string> seen_;
};

template <typename F>
auto checked(Obj& o, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    o.fail(e.what(), key);
  }
}

SensorSpec parse_sensor(Obj o, const std::vector<DpsModel>& pool) {
  SensorSpec s;
  if (o.has("archetype")) {
    const std::string id = o.str("archetype");
    s.model = checked(o, "archetype", [&] { return find_archetype(pool, id); });
  } else {
    const std::string id = o.str("part_id", "custom");
    const Interval band = o.interval("resonant_band_hz");
    const Interval range = o.has("pressure_range_pa") ? o.interval("pressure_range_pa") : Interval{-500, 500};
    const std::string tag = o.str("transducer", "piezoresistive");
    s.model = checked(o, "resonant_band_hz", [&] {
      return DpsModel::calibrated(id, transducer_from_string(tag), range, band);
    });
  }
  s.model.damping_ratio = o.num("damping_ratio", s.model.damping_ratio);
  if (o.has("tube")) {
    Obj t = o.child("tube");
    s.path.tube.length_m = t.num("length_m", 0.0);
    s.path.tube.inner_diameter_m = inches(t.num("inner_diameter_in", 5.0 / 16.0));
    s.path.tube.pickup_device = t.boolean("pickup_device", false);
    s.path.tube.sound_speed_mps = t.num("sound_speed_mps", calib::kSoundSpeedMps);
    t.finish();
  }
  checked(o, "", [&] {
    s.model.validate();
    s.path.tube.validate();
    return 0;
  });
  o.finish();
  return s;
}

void parse_path(Obj o, PathModel& p) {
  p.pickup_loss_db = o.num("pickup_loss_db", p.pickup_loss_db);
  p.extra_loss_db = o.num("extra_loss_db", p.extra_loss_db);
  p.loss.ref_db_per_m = o.num("tube_loss_db_per_m", p.loss.ref_db_per_m);
  p.loss.frequency_exponent = o.num("loss_frequency_exponent", p.loss.frequency_exponent);
  p.coupling_gain = o.num("coupling_gain", p.coupling_gain);
  p.saturation_pa = o.num("saturation_pa", p.saturation_pa);
  checked(o, "", [&] {
    p.validate();
    return 0;
  });
  o.finish();
}

SegmentSchedule parse_schedule(Obj o) {
  SegmentSchedule s;
  s.duration_s = o.num("td_ms", 2.0) * 1e-3;
  s.interval_s = o.num("ti_ms", 15.0) * 1e-3;
  if (o.has("band_hz")) s.band_hz = o.interval("band_hz");
  if (o.has("cycles")) {
    const json& c = o.raw("cycles");
    if (c.is_number_integer()) s.cycles_per_segment = {c.get<int>()};
    else if (c.is_array()) {
      for (const auto& v : c) {
        if (!v.is_number_integer()) o.fail("cycles must be integers", "cycles");
        s.cycles_per_segment.push_back(v.get<int>());
      }
    } else {
      o.fail("expected an integer or a list of integers", "cycles");
    }
  }
  s.amplitude_scale = o.num("amplitude_scale", s.amplitude_scale);
  s.fade_in_s = o.num("fade_in_ms", s.fade_in_s * 1e3) * 1e-3;
  s.start_s = o.num("offset_ms", 0.0) * 1e-3;
  o.finish();
  return s;
}

PortKind parse_port(Obj& o) {
  const std::string p = o.str("port");
  if (p == "low") return PortKind::low;
  if (p == "high") return PortKind::high;
  if (p == "common_high") return PortKind::common_high;
  o.fail("port must be low, high or common_high", "port");
}

Attack parse_attack(Obj o, const ScenarioFile& f, const std::map<std::string, std::size_t>& room_ids,
                    const std::filesystem::path& base_dir,
                    const std::optional<SensorSpec>& rpm_sensor) {
  Attack a;
  const std::string tgt = o.str("target", "hvac");
  if (tgt == "hvac") a.target = AttackTarget::hvac;
  else if (tgt == "rpm") a.target = AttackTarget::rpm;
  else if (tgt == "both") a.target = AttackTarget::both;
  else o.fail("target must be hvac, rpm or both", "target");
  a.port = parse_port(o);
  if (o.has("room")) {
    const json& r = o.raw("room");
    if (r.is_number_unsigned()) a.room = r.get<std::size_t>();
    else if (r.is_string() && room_ids.contains(r.get<std::string>())) a.room = room_ids.at(r.get<std::string>());
    else o.fail("room must be an index or a declared room name", "room");
    if (a.room >= f.scenario.rooms.size()) o.fail("room index out of range", "room");
  }
  a.signal.start_s = o.num("start_s", 0.0);
  a.signal.ramp_s = o.num("ramp_s", a.signal.ramp_s);

  const bool level = o.has("forged_pa");
  const bool acoustic = o.has("source");
  if (level == acoustic) o.fail("attack needs exactly one of 'forged_pa' or 'source'");
  if (level) {
    a.signal.level_pa = o.num("forged_pa");
  } else {
    AcousticAttack ac;
    const SensorSpec& sensor = (a.target == AttackTarget::rpm && rpm_sensor) ? *rpm_sensor : f.sensor;
    ac.model = sensor.model;
    ac.path = sensor.path;
    Obj s = o.child("source");
    ac.source.spl_db = s.num("spl_db");
    ac.source.ref_distance_m = s.num("ref_distance_m");
    ac.source.position_distance_m = s.num("distance_m");
    ac.source.phase_rad = s.num("phase_rad", 0.0);
    if (s.has("carrier_wav")) {
      auto p = std::filesystem::path(s.str("carrier_wav"));
      if (p.is_relative()) p = base_dir / p;
      ac.carrier = checked(s, "carrier_wav", [&] { return read_wav(p); });
    }
    checked(s, "", [&] {
      ac.source.validate();
      return 0;
    });
    s.finish();
    ac.schedule = o.has("schedule") ? parse_schedule(o.child("schedule")) : SegmentSchedule{};
    if (o.has("target_hz")) {
      const json& t = o.raw("target_hz");
      if (t.is_number()) ac.target_hz = t.get<double>();
      else if (!(t.is_string() && t.get<std::string>() == "auto"))
        o.fail("target_hz must be a number or \"auto\"", "target_hz");
    }
    if (ac.target_hz && ac.schedule.band_hz.hi <= 0.0)
      ac.schedule.band_hz = {*ac.target_hz - 5.0, *ac.target_hz + 5.0};
    if (ac.target_hz)
      checked(o, "schedule", [&] {
        ac.schedule.validate(*ac.target_hz);
        return 0;
      });
    a.acoustic = std::move(ac);
  }
  o.finish();
  return a;
}

Countermeasure parse_countermeasure(Obj o) {
  Countermeasure cm;
  const std::string kind = o.str("kind");
  cm.kind = checked(o, "kind", [&] { return countermeasure_kind_from_string(kind); });
  switch (cm.kind) {
    case CountermeasureKind::long_tube: cm.value = o.num("length_m"); break;
    case CountermeasureKind::enclosure: cm.value = o.num("extra_loss_db"); break;
    case CountermeasureKind::lpf:
      cm.value = o.num("cutoff_hz");
      cm.order = static_cast<int>(o.num("order", 1));
      break;
    case CountermeasureKind::raised_setpoint: cm.value = o.num("setpoint_pa"); break;
    case CountermeasureKind::microphone: break;
  }
  if (o.has("applied_to")) cm.applied_to = parse_port(o);
  checked(o, "kind", [&] {
    cm.validate();
    return 0;
  });
  o.finish();
  return cm;
}

}  // namespace

ScenarioFile parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(std::string("malformed JSON: ") + e.what(), line);
  }
  const LineIndex lines(text);
  Obj o(root, "", lines);
  const auto pool = checked(o, "", [] { return default_archetypes(); });

  ScenarioFile f;
  NprScenario& sc = f.scenario;
  sc.name = o.str("name", "scenario");
  sc.horizon_s = o.num("horizon_s", sc.horizon_s);
  if (o.has("seed")) {
    const json& s = o.raw("seed");
    if (!s.is_number_unsigned()) o.fail("seed must be a non-negative integer", "seed");
    sc.seed = s.get<std::uint64_t>();
  }
  sc.hallway_pa = o.num("hallway_pa", sc.hallway_pa);
  sc.plant_dt = o.num("plant_dt_s", sc.plant_dt);
  sc.sensor_noise_pa = o.num("sensor_noise_pa", 0.0);

  if (o.has("topology")) {
    Obj t = o.child("topology");
    const std::string rpm = t.str("rpm_sensor", "shared");
    if (rpm != "shared" && rpm != "separate") t.fail("rpm_sensor must be shared or separate", "rpm_sensor");
    sc.separate_rpm = rpm == "separate";
    const std::string hp = t.str("high_port", "per_room");
    if (hp != "per_room" && hp != "common") t.fail("high_port must be per_room or common", "high_port");
    sc.common_high_port = hp == "common";
    t.finish();
  }

  f.sensor.model = find_archetype(pool, "A1011-00");
  if (o.has("sensor")) f.sensor = parse_sensor(o.child("sensor"), pool);
  if (o.has("path")) parse_path(o.child("path"), f.sensor.path);
  std::optional<SensorSpec> rpm_sensor;
  if (o.has("rpm_sensor")) {
    rpm_sensor = parse_sensor(o.child("rpm_sensor"), pool);
    PathModel p = f.sensor.path;
    p.tube = rpm_sensor->path.tube;
    rpm_sensor->path = p;
  }

  ControllerConfig ctrl;
  if (o.has("controller")) {
    Obj c = o.child("controller");
    ctrl.setpoint_pa = c.num("setpoint_pa", ctrl.setpoint_pa);
    ctrl.gain = c.num("gain", ctrl.gain);
    ctrl.control_period_s = c.num("control_period_s", ctrl.control_period_s);
    ctrl.deadband_pa = c.num("deadband_pa", ctrl.deadband_pa);
    ctrl.averaging_window_s = c.num("averaging_window_s", ctrl.averaging_window_s);
    checked(c, "", [&] {
      ctrl.validate();
      return 0;
    });
    c.finish();
  }

  std::map<std::string, std::size_t> room_ids;
  if (o.has("rooms")) {
    sc.rooms.clear();
    for (Obj r : o.children("rooms")) {
      Room room;
      room.name = r.str("name", "room" + std::to_string(sc.rooms.size() + 1));
      if (room_ids.contains(room.name)) r.fail("duplicate room name '" + room.name + "'", "name");
      room.controller = ctrl;
      room.controller.setpoint_pa = r.num("setpoint_pa", ctrl.setpoint_pa);
      room.state.pressure_pa = sc.hallway_pa + r.num("initial_pd_pa", room.controller.setpoint_pa);
      room.state.volume_m3 = r.num("volume_m3", room.state.volume_m3);
      room.state.leak_coeff = r.num("leak_coeff", room.state.leak_coeff);
      room.fan_max_flow_m3ps = r.num("fan_max_flow_m3ps", room.fan_max_flow_m3ps);
      room.fan_time_constant_s = r.num("fan_time_constant_s", room.fan_time_constant_s);
      checked(r, "setpoint_pa", [&] {
        room.controller.validate();
        return 0;
      });
      r.finish();
      room_ids[room.name] = sc.rooms.size();
      sc.rooms.push_back(std::move(room));
    }
    if (sc.rooms.empty()) o.fail("at least one room is required", "rooms");
  } else {
    sc.rooms.front().controller = ctrl;
    sc.rooms.front().state.pressure_pa = sc.hallway_pa + ctrl.setpoint_pa;
    room_ids[sc.rooms.front().name] = 0;
  }

  if (o.has("alarm")) {
    Obj a = o.child("alarm");
    sc.alarm.threshold_pa = a.num("threshold_pa", sc.alarm.threshold_pa);
    sc.alarm.dwell_s = a.num("dwell_s", sc.alarm.dwell_s);
    sc.alarm.hysteresis_frac = a.num("hysteresis_frac", sc.alarm.hysteresis_frac);
    checked(a, "", [&] {
      sc.alarm.validate();
      return 0;
    });
    a.finish();
  }

  if (o.has("attacks"))
    for (Obj a : o.children("attacks"))
      sc.attacks.push_back(parse_attack(std::move(a), f, room_ids, base_dir, rpm_sensor));

  if (o.has("countermeasures"))
    for (Obj c : o.children("countermeasures")) f.countermeasures.push_back(parse_countermeasure(std::move(c)));

  o.finish();
  checked(o, "", [&] {
    sc.validate();
    return 0;
  });
  return f;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ScenarioFile f = parse_scenario(ss.str(), path.parent_path());
  f.origin = path;
  return f;
}

}  // namespace nprsim

#include "nprsim/plant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>

#include "nprsim/calibration.hpp"
#include "nprsim/errors.hpp"

namespace nprsim {
namespace {

// Running integral of a ForgedSignal; sampled series use cached prefix sums.
class SignalIntegral {
 public:
  explicit SignalIntegral(const ForgedSignal& s) : s_(s) {
    if (s.samples) {
      if (!(s.sample_dt > 0.0)) throw ValidationError("sampled forged signal needs sample_dt > 0");
      prefix_.resize(s.samples->size() + 1, 0.0);
      for (std::size_t i = 0; i < s.samples->size(); ++i)
        prefix_[i + 1] = prefix_[i] + (*s.samples)[i];
    }
  }

  double at(double t) const {
    const double tau = t - s_.start_s;
    if (tau <= 0.0) return 0.0;
    if (!s_.samples) {
      if (s_.ramp_s <= 0.0 || tau >= s_.ramp_s)
        return s_.level_pa * (tau - 0.5 * std::max(0.0, s_.ramp_s));
      return s_.level_pa * tau * tau / (2.0 * s_.ramp_s);
    }
    const std::size_t n = s_.samples->size();
    if (n == 0) return 0.0;
    const double period = static_cast<double>(n) * s_.sample_dt;
    const double whole = std::floor(tau / period);
    const double rem = tau - whole * period;
    const auto k = std::min(n - 1, static_cast<std::size_t>(rem / s_.sample_dt));
    const double part = prefix_[k] * s_.sample_dt + (*s_.samples)[k] * (rem - k * s_.sample_dt);
    return whole * prefix_[n] * s_.sample_dt + part;
  }

  double average(double t0, double t1) const {
    if (t1 <= t0) return s_.value(t0);
    return (at(t1) - at(t0)) / (t1 - t0);
  }

 private:
  const ForgedSignal& s_;
  std::vector<double> prefix_;
};

std::size_t steps_for(double seconds, double dt) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(seconds / dt)));
}

}  // namespace

void FanState::validate() const {
  if (!(speed_frac >= 0.0 && speed_frac <= 1.0)) throw ValidationError("fan speed outside [0, 1]");
  if (!(max_flow_m3ps > 0.0)) throw ValidationError("fan capacity must be > 0");
  if (!(time_constant_s > 0.0)) throw ValidationError("fan time constant must be > 0");
}

void ControllerConfig::validate() const {
  if (!(control_period_s > 0.0)) throw ValidationError("control_period_s must be > 0");
  if (!(gain > 0.0)) throw ValidationError("controller gain must be > 0");
  if (!(setpoint_pa < 0.0)) throw ValidationError("setpoint must be negative for a negative-pressure room");
  if (!(deadband_pa >= 0.0)) throw ValidationError("deadband must be >= 0");
  if (!(averaging_window_s >= 0.0)) throw ValidationError("averaging window must be >= 0");
}

void AlarmConfig::validate() const {
  if (!(threshold_pa > 0.0)) throw ValidationError("alarm threshold must be > 0");
  if (!(dwell_s >= 0.0)) throw ValidationError("alarm dwell must be >= 0");
  if (!(hysteresis_frac >= 0.0 && hysteresis_frac < 1.0))
    throw ValidationError("alarm hysteresis must lie in [0, 1)");
}

double measured_differential(const RoomState& room, double hallway_pa, double forged_low,
                             double forged_high) {
  return (room.pressure_pa + forged_low) - (hallway_pa + forged_high);
}

FanCommands controller_step(const ControllerConfig& cfg, double measured, const FanCommands& current) {
  const double error = measured - cfg.setpoint_pa;
  if (std::abs(error) <= cfg.deadband_pa) return current;
  // positive error: not negative enough, so pull less air in and push more out
  FanCommands next;
  next.supply = std::clamp(current.supply - cfg.gain * error, 0.0, 1.0);
  next.exhaust = std::clamp(current.exhaust + cfg.gain * error, 0.0, 1.0);
  return next;
}

FanCommands equilibrium_commands(double setpoint_pa, double leak_coeff, double max_flow,
                                 double exhaust) {
  FanCommands c;
  c.exhaust = exhaust;
  c.supply = std::clamp(exhaust + leak_coeff * setpoint_pa / max_flow, 0.0, 1.0);
  return c;
}

std::vector<AlarmEvent> rpm_alarm(std::span<const double> measured, double dt, double setpoint_pa,
                                  const AlarmConfig& cfg, const std::string& monitor, double t0) {
  cfg.validate();
  std::vector<AlarmEvent> events;
  bool active = false;
  double since = -1.0;  // start of the current violation, < 0 when none
  const double clear_level = cfg.threshold_pa * (1.0 - cfg.hysteresis_frac);
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    const double dev = std::abs(measured[i] - setpoint_pa);
    if (!active) {
      if (dev > cfg.threshold_pa) {
        if (since < 0.0) since = t;
        if (t - since >= cfg.dwell_s - 1e-9) {
          active = true;
          events.push_back({t, true, monitor, measured[i]});
        }
      } else {
        since = -1.0;
      }
    } else if (dev < clear_level) {
      active = false;
      since = -1.0;
      events.push_back({t, false, monitor, measured[i]});
    }
  }
  return events;
}

const char* to_string(PortKind p) {
  switch (p) {
    case PortKind::low: return "low";
    case PortKind::high: return "high";
    case PortKind::common_high: return "common_high";
  }
  return "?";
}

const char* to_string(AttackTarget t) {
  switch (t) {
    case AttackTarget::hvac: return "hvac";
    case AttackTarget::rpm: return "rpm";
    case AttackTarget::both: return "both";
  }
  return "?";
}

double ForgedSignal::value(double t) const {
  const double tau = t - start_s;
  if (tau < 0.0) return 0.0;
  if (samples) {
    if (samples->empty() || !(sample_dt > 0.0)) return 0.0;
    const auto k = static_cast<std::size_t>(tau / sample_dt) % samples->size();
    return (*samples)[k];
  }
  if (ramp_s <= 0.0 || tau >= ramp_s) return level_pa;
  return level_pa * tau / ramp_s;
}

double ForgedSignal::average(double t0, double t1) const {
  return SignalIntegral(*this).average(t0, t1);
}

double acoustic_forged_level(const AcousticAttack& a) {
  ForgedOptions opts;
  opts.post_lpf_hz = a.post_lpf_hz;
  opts.carrier = a.carrier;
  if (a.target_hz) {
    opts.target_hz = a.target_hz;
    return forged_pressure_estimate(a.schedule, a.model, a.path, a.source, opts);
  }
  return forged_at_resonance(a.model, a.path, a.source, a.schedule, opts);
}

void NprScenario::validate() const {
  if (rooms.empty()) throw ValidationError("scenario has no rooms");
  if (!(plant_dt > 0.0)) throw ValidationError("plant_dt must be > 0");
  for (const auto& r : rooms) {
    r.controller.validate();
    if (!(r.state.volume_m3 > 0.0)) throw ValidationError("room volume must be > 0");
    if (!(r.state.leak_coeff > 0.0)) throw ValidationError("leak coefficient must be > 0");
    if (!std::isfinite(r.state.pressure_pa)) throw ValidationError("room pressure must be finite");
    if (!(r.fan_max_flow_m3ps > 0.0)) throw ValidationError("fan capacity must be > 0");
    if (!(r.fan_time_constant_s > 0.0)) throw ValidationError("fan time constant must be > 0");
    if (r.controller.control_period_s < plant_dt)
      throw ValidationError("control period shorter than the plant step");
  }
  const double period = rooms.front().controller.control_period_s;
  if (!(horizon_s >= 10.0 * period))
    throw ValidationError("horizon must cover at least 10 control periods");
  alarm.validate();
  if (common_high_port && rooms.size() < 2)
    throw ValidationError("a common high-pressure port needs at least two rooms");
  if (!(sensor_noise_pa >= 0.0)) throw ValidationError("sensor noise must be >= 0");
  for (const auto& a : attacks) {
    if (a.port == PortKind::common_high && !common_high_port)
      throw ValidationError("common_high attack requires the common high-port topology");
    if (a.port != PortKind::common_high && a.room >= rooms.size())
      throw ValidationError("attack refers to room " + std::to_string(a.room) + " which does not exist");
    if (!std::isfinite(a.signal.level_pa)) throw ValidationError("forged level must be finite");
    if (!(a.signal.ramp_s >= 0.0)) throw ValidationError("ramp must be >= 0");
    if (a.target != AttackTarget::hvac && !separate_rpm && a.target == AttackTarget::rpm)
      throw ValidationError("rpm-only attack needs a separate RPM sensor");
  }
}

bool SimulationResult::alarm_raised() const {
  return std::any_of(alarms.begin(), alarms.end(), [](const AlarmEvent& e) { return e.raised; });
}

bool SimulationResult::any_room_positive() const {
  return std::any_of(steady_true_pd.begin(), steady_true_pd.end(), [](double v) { return v > 0.0; });
}

void resolve_attacks(NprScenario& scenario) {
  for (auto& a : scenario.attacks)
    if (a.acoustic) a.signal.level_pa = acoustic_forged_level(*a.acoustic);
}

SimulationResult simulate_scenario(const NprScenario& input) {
  NprScenario sc = input;
  resolve_attacks(sc);
  sc.validate();

  const std::size_t nr = sc.rooms.size();
  const double dt = sc.plant_dt;
  const double k_air = plant_defaults::kAirBulkModulusPa;
  const std::size_t steps = steps_for(sc.horizon_s, dt);
  const std::size_t trace_every = steps_for(sc.rooms.front().controller.control_period_s, dt);

  struct RoomRun {
    double p, s, e;       // P_L, supply and exhaust speeds
    FanCommands cmd;
    std::size_t ctrl_every, window;
    std::deque<double> hvac_hist, rpm_hist;
    double hvac_avg = 0.0, rpm_avg = 0.0;
    std::vector<double> rpm_series;
  };
  std::vector<RoomRun> run(nr);
  for (std::size_t r = 0; r < nr; ++r) {
    const Room& room = sc.rooms[r];
    const FanCommands eq = room.initial_speeds.value_or(equilibrium_commands(
        room.controller.setpoint_pa, room.state.leak_coeff, room.fan_max_flow_m3ps));
    run[r].p = room.state.pressure_pa;
    run[r].s = eq.supply;
    run[r].e = eq.exhaust;
    run[r].cmd = eq;
    run[r].ctrl_every = steps_for(room.controller.control_period_s, dt);
    run[r].window = steps_for(room.controller.window_s(), dt);
    run[r].rpm_series.reserve(steps + 1);
  }

  std::vector<SignalIntegral> integrals;
  integrals.reserve(sc.attacks.size());
  for (const auto& a : sc.attacks) integrals.emplace_back(a.signal);

  std::mt19937_64 rng(sc.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  SimulationResult res;
  res.scenario = sc.name;
  res.separate_rpm = sc.separate_rpm;
  for (const auto& r : sc.rooms) res.room_names.push_back(r.name);
  for (const auto& a : sc.attacks) res.forged_levels.push_back(a.signal.level_pa);

  auto derivs = [&](std::size_t r, double p, double s, double e, double& dp, double& ds, double& de) {
    const Room& room = sc.rooms[r];
    const double q = room.fan_max_flow_m3ps * (s - e) - room.state.leak_coeff * (p - sc.hallway_pa);
    dp = k_air / room.state.volume_m3 * q;
    ds = (run[r].cmd.supply - s) / room.fan_time_constant_s;
    de = (run[r].cmd.exhaust - e) / room.fan_time_constant_s;
  };

  auto readings = [&](double t0, double t1, std::vector<double>& hvac, std::vector<double>& rpm) {
    std::vector<double> hl(nr, 0.0), hh(nr, 0.0), rl(nr, 0.0), rh(nr, 0.0);
    for (std::size_t i = 0; i < sc.attacks.size(); ++i) {
      const Attack& a = sc.attacks[i];
      const double v = integrals[i].average(t0, t1);
      const bool to_hvac = !sc.separate_rpm || a.target != AttackTarget::rpm;
      const bool to_rpm = !sc.separate_rpm || a.target != AttackTarget::hvac;
      const bool all_rooms = a.port == PortKind::common_high ||
                             (a.port == PortKind::high && sc.common_high_port);
      for (std::size_t r = 0; r < nr; ++r) {
        if (!all_rooms && r != a.room) continue;
        if (a.port == PortKind::low) {
          if (to_hvac) hl[r] += v;
          if (to_rpm) rl[r] += v;
        } else {
          if (to_hvac) hh[r] += v;
          if (to_rpm) rh[r] += v;
        }
      }
    }
    for (std::size_t r = 0; r < nr; ++r) {
      RoomState st = sc.rooms[r].state;
      st.pressure_pa = run[r].p;
      hvac[r] = measured_differential(st, sc.hallway_pa, hl[r], hh[r]);
      rpm[r] = sc.separate_rpm ? measured_differential(st, sc.hallway_pa, rl[r], rh[r]) : hvac[r];
      if (sc.sensor_noise_pa > 0.0) {
        hvac[r] += sc.sensor_noise_pa * noise(rng);
        rpm[r] = sc.separate_rpm ? rpm[r] + sc.sensor_noise_pa * noise(rng) : hvac[r];
      }
    }
  };

  auto push = [&](std::size_t r, double hv, double rp) {
    auto& R = run[r];
    R.hvac_hist.push_back(hv);
    R.rpm_hist.push_back(rp);
    if (R.hvac_hist.size() > R.window) {
      R.hvac_hist.pop_front();
      R.rpm_hist.pop_front();
    }
    double a = 0.0, b = 0.0;
    for (double v : R.hvac_hist) a += v;
    for (double v : R.rpm_hist) b += v;
    R.hvac_avg = a / static_cast<double>(R.hvac_hist.size());
    R.rpm_avg = b / static_cast<double>(R.rpm_hist.size());
    R.rpm_series.push_back(R.rpm_avg);
  };

  auto record = [&](double t) {
    TraceRow row;
    row.time_s = t;
    for (std::size_t r = 0; r < nr; ++r) {
      row.true_pd.push_back(run[r].p - sc.hallway_pa);
      row.hvac_measured.push_back(run[r].hvac_avg);
      row.rpm_measured.push_back(run[r].rpm_avg);
      row.supply.push_back(run[r].s);
      row.exhaust.push_back(run[r].e);
    }
    res.rows.push_back(std::move(row));
  };

  std::vector<double> hv(nr), rp(nr);
  readings(0.0, 0.0, hv, rp);
  for (std::size_t r = 0; r < nr; ++r) push(r, hv[r], rp[r]);
  record(0.0);

  std::size_t quiet_since = 0;  // first step of the current run below the steady-rate bound
  bool quiet = false;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t0 = static_cast<double>(n) * dt;
    const double t1 = static_cast<double>(n + 1) * dt;
    double max_rate = 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
      auto& R = run[r];
      double k1p, k1s, k1e, k2p, k2s, k2e, k3p, k3s, k3e, k4p, k4s, k4e;
      derivs(r, R.p, R.s, R.e, k1p, k1s, k1e);
      derivs(r, R.p + 0.5 * dt * k1p, R.s + 0.5 * dt * k1s, R.e + 0.5 * dt * k1e, k2p, k2s, k2e);
      derivs(r, R.p + 0.5 * dt * k2p, R.s + 0.5 * dt * k2s, R.e + 0.5 * dt * k2e, k3p, k3s, k3e);
      derivs(r, R.p + dt * k3p, R.s + dt * k3s, R.e + dt * k3e, k4p, k4s, k4e);
      R.p += dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
      R.s += dt / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s);
      R.e += dt / 6.0 * (k1e + 2 * k2e + 2 * k3e + k4e);
      if (!std::isfinite(R.p)) throw NonFiniteInputError("room pressure diverged");
      double dp, ds, de;
      derivs(r, R.p, R.s, R.e, dp, ds, de);
      max_rate = std::max(max_rate, std::abs(dp));
    }
    readings(t0, t1, hv, rp);
    for (std::size_t r = 0; r < nr; ++r) {
      push(r, hv[r], rp[r]);
      if ((n + 1) % run[r].ctrl_every == 0)
        run[r].cmd = controller_step(sc.rooms[r].controller, run[r].hvac_avg, run[r].cmd);
    }
    if (max_rate < sc.steady_rate_pa_per_s) {
      if (!quiet) {
        quiet = true;
        quiet_since = n + 1;
      }
    } else {
      quiet = false;
    }
    if ((n + 1) % trace_every == 0) record(t1);
  }

  res.converged = quiet && static_cast<double>(steps - quiet_since) * dt >= sc.steady_hold_s - 1e-9;
  res.steady_time_s = quiet ? static_cast<double>(quiet_since) * dt : sc.horizon_s;
  for (std::size_t r = 0; r < nr; ++r) {
    res.steady_true_pd.push_back(run[r].p - sc.hallway_pa);
    res.steady_hvac_measured.push_back(run[r].hvac_avg);
    res.steady_rpm_measured.push_back(run[r].rpm_avg);
    const std::string monitor = (sc.separate_rpm ? "rpm:" : "dps:") + sc.rooms[r].name;
    auto ev = rpm_alarm(run[r].rpm_series, dt, sc.rooms[r].controller.setpoint_pa, sc.alarm, monitor);
    res.alarms.insert(res.alarms.end(), ev.begin(), ev.end());
  }
  std::stable_sort(res.alarms.begin(), res.alarms.end(),
                   [](const AlarmEvent& a, const AlarmEvent& b) { return a.time_s < b.time_s; });

  for (auto& row : res.rows) {
    row.alarm.assign(nr, false);
    for (std::size_t r = 0; r < nr; ++r) {
      const std::string suffix = ":" + sc.rooms[r].name;
      bool on = false;
      for (const auto& e : res.alarms) {
        if (e.time_s > row.time_s + 1e-9) break;
        if (e.monitor.size() >= suffix.size() &&
            e.monitor.compare(e.monitor.size() - suffix.size(), suffix.size(), suffix) == 0)
          on = e.raised;
      }
      row.alarm[r] = on;
    }
  }
  return res;
}

SimulationResult simulate_dual_dps(const NprScenario& scenario) {
  if (!scenario.separate_rpm)
    throw ValidationError("dual-DPS simulation needs separate HVAC and RPM sensors");
  return simulate_scenario(scenario);
}

SimulationResult simulate_multi_room(const NprScenario& scenario) {
  if (!scenario.common_high_port || scenario.rooms.size() < 2)
    throw ValidationError("multi-room simulation needs >= 2 rooms on a common high port");
  return simulate_scenario(scenario);
}

std::string fmt6(double v) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_trace_csv(std::ostream& os, const SimulationResult& r) {
  os << "time_s";
  for (const auto& n : r.room_names) os << ",true_pd_" << n;
  for (const auto& n : r.room_names) os << ",hvac_pd_" << n;
  if (r.separate_rpm)
    for (const auto& n : r.room_names) os << ",rpm_pd_" << n;
  for (const auto& n : r.room_names) os << ",supply_" << n << ",exhaust_" << n;
  for (const auto& n : r.room_names) os << ",alarm_" << n;
  os << '\n';
  for (const auto& row : r.rows) {
    os << fmt6(row.time_s);
    for (double v : row.true_pd) os << ',' << fmt6(v);
    for (double v : row.hvac_measured) os << ',' << fmt6(v);
    if (r.separate_rpm)
      for (double v : row.rpm_measured) os << ',' << fmt6(v);
    for (std::size_t i = 0; i < row.supply.size(); ++i)
      os << ',' << fmt6(row.supply[i]) << ',' << fmt6(row.exhaust[i]);
    for (bool a : row.alarm) os << ',' << (a ? 1 : 0);
    os << '\n';
  }
}

void write_summary(std::ostream& os, const SimulationResult& r) {
  os << "scenario: " << r.scenario << '\n';
  os << "converged: " << (r.converged ? "yes" : "no") << '\n';
  os << "steady_time_s: " << fmt6(r.steady_time_s) << '\n';
  for (std::size_t i = 0; i < r.forged_levels.size(); ++i)
    os << "attack_" << i << "_forged_pa: " << fmt6(r.forged_levels[i]) << '\n';
  for (std::size_t i = 0; i < r.room_names.size(); ++i) {
    const auto& n = r.room_names[i];
    os << "room " << n << ": steady_true_pd_pa " << fmt6(r.steady_true_pd[i])
       << ", hvac_measured_pa " << fmt6(r.steady_hvac_measured[i]);
    if (r.separate_rpm) os << ", rpm_measured_pa " << fmt6(r.steady_rpm_measured[i]);
    os << ", sign " << (r.steady_true_pd[i] > 0.0 ? "positive" : "negative") << '\n';
  }
  os << "alarm_events: " << r.alarms.size() << '\n';
  for (const auto& e : r.alarms)
    os << "  t=" << fmt6(e.time_s) << "s " << e.monitor << ' ' << (e.raised ? "raised" : "cleared")
       << " reading " << fmt6(e.reading_pa) << '\n';
  os << "verdict: " << (r.any_room_positive() ? "room pressure positive" : "negative pressure held")
     << (r.alarm_raised() ? ", alarm raised" : ", no alarm") << '\n';
}

}  // namespace nprsim

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nprsim/acoustics.hpp"
#include "nprsim/sensor.hpp"
#include "nprsim/waveform.hpp"

namespace nprsim {

namespace plant_defaults {
inline constexpr double kAirBulkModulusPa = 1.4 * 101325.0;  // adiabatic
inline constexpr double kHallwayPa = 12.5;
inline constexpr double kRoomVolumeM3 = 50.0;
inline constexpr double kLeakCoeff = 0.01;     // m^3/s per Pa
inline constexpr double kFanMaxFlow = 0.4;     // m^3/s, about 29 ACH for the default room
inline constexpr double kFanTimeConstant = 2.0;
inline constexpr double kExhaustSpeed = 0.5;  // equilibrium exhaust speed at start
inline constexpr double kPlantDt = 0.01;
}  // namespace plant_defaults

struct RoomState {
  double pressure_pa = plant_defaults::kHallwayPa - 2.5;  // P_L on the hallway datum
  double volume_m3 = plant_defaults::kRoomVolumeM3;
  double leak_coeff = plant_defaults::kLeakCoeff;
};

struct FanState {
  double speed_frac = 0.5;
  double command = 0.5;
  double max_flow_m3ps = plant_defaults::kFanMaxFlow;
  double time_constant_s = plant_defaults::kFanTimeConstant;

  double flow() const { return speed_frac * max_flow_m3ps; }
  void validate() const;
};

struct ControllerConfig {
  double setpoint_pa = -2.5;
  double gain = 6.25e-4;  // command change per Pa of error per control period
  double control_period_s = 0.5;
  double deadband_pa = 0.2;
  /// Averaging window for the reading fed to the controller (0: one control period).
  double averaging_window_s = 0.0;

  double window_s() const { return averaging_window_s > 0.0 ? averaging_window_s : control_period_s; }
  void validate() const;
};

struct FanCommands {
  double supply = 0.0;
  double exhaust = 0.0;
};

struct AlarmConfig {
  double threshold_pa = 2.0;
  double dwell_s = 5.0;
  double hysteresis_frac = 0.1;
  void validate() const;
};

struct AlarmEvent {
  double time_s = 0.0;
  bool raised = true;  // false: cleared
  std::string monitor;
  double reading_pa = 0.0;
};

/// (P_L + forged_low) - (P_H + forged_high).
double measured_differential(const RoomState& room, double hallway_pa, double forged_low,
                             double forged_high);

/// One pass of the pressure controller on a (window-averaged) reading.
FanCommands controller_step(const ControllerConfig& cfg, double measured, const FanCommands& current);

/// Supply/exhaust speeds that hold `setpoint` at equilibrium.
FanCommands equilibrium_commands(double setpoint_pa, double leak_coeff,
                                 double max_flow = plant_defaults::kFanMaxFlow,
                                 double exhaust = plant_defaults::kExhaustSpeed);

/// Alarm events on a uniformly sampled reading.
std::vector<AlarmEvent> rpm_alarm(std::span<const double> measured, double dt, double setpoint_pa,
                                  const AlarmConfig& cfg, const std::string& monitor = "rpm",
                                  double t0 = 0.0);

enum class PortKind { low, high, common_high };
enum class AttackTarget { hvac, rpm, both };

const char* to_string(PortKind p);
const char* to_string(AttackTarget t);

/// Forged pressure seen at one port: a level ramped in from `start_s`, or a sampled series.
struct ForgedSignal {
  double level_pa = 0.0;
  double start_s = 0.0;
  double ramp_s = 60.0;
  /// When set, replaces the level: series repeated with step `sample_dt` from start_s.
  std::shared_ptr<const std::vector<double>> samples;
  double sample_dt = 0.0;

  double value(double t) const;
  /// Mean over [t0, t1].
  double average(double t0, double t1) const;
};

/// Acoustic origin of an attack, resolved to ForgedSignal::level_pa before simulation.
struct AcousticAttack {
  DpsModel model;
  PathModel path;
  AcousticSource source;
  SegmentSchedule schedule;
  std::optional<double> target_hz;  // empty: attacker tunes to the resonance
  double post_lpf_hz = 0.0;
  std::optional<AudioBuffer> carrier;
};

struct Attack {
  AttackTarget target = AttackTarget::hvac;
  PortKind port = PortKind::low;
  std::size_t room = 0;
  ForgedSignal signal;
  std::optional<AcousticAttack> acoustic;
};

/// Forged level of an acoustic attack (time-averaged rectified sensor output).
double acoustic_forged_level(const AcousticAttack& a);

struct Room {
  std::string name = "npr";
  RoomState state;
  ControllerConfig controller;
  std::optional<FanCommands> initial_speeds;  // equilibrium for the setpoint when empty
  double fan_max_flow_m3ps = plant_defaults::kFanMaxFlow;
  double fan_time_constant_s = plant_defaults::kFanTimeConstant;
};

struct NprScenario {
  std::string name = "scenario";
  double horizon_s = 300.0;
  std::uint64_t seed = 0;
  double hallway_pa = plant_defaults::kHallwayPa;
  bool separate_rpm = false;      // RPM has its own DPS
  bool common_high_port = false;  // all rooms share one high-pressure port
  std::vector<Room> rooms{Room{}};
  AlarmConfig alarm;
  std::vector<Attack> attacks;
  double plant_dt = plant_defaults::kPlantDt;
  double sensor_noise_pa = 0.0;  // Gaussian, seeded
  double steady_rate_pa_per_s = 1e-3;
  double steady_hold_s = 5.0;

  void validate() const;
};

struct TraceRow {
  double time_s = 0.0;
  std::vector<double> true_pd;
  std::vector<double> hvac_measured;
  std::vector<double> rpm_measured;
  std::vector<double> supply;
  std::vector<double> exhaust;
  std::vector<bool> alarm;
};

struct SimulationResult {
  std::string scenario;
  std::vector<std::string> room_names;
  bool separate_rpm = false;
  std::vector<TraceRow> rows;  // one per control period
  std::vector<AlarmEvent> alarms;
  std::vector<double> steady_true_pd;
  std::vector<double> steady_hvac_measured;
  std::vector<double> steady_rpm_measured;
  std::vector<double> forged_levels;  // per attack, after resolution
  bool converged = false;
  double steady_time_s = 0.0;

  bool alarm_raised() const;
  bool any_room_positive() const;
};

/// Resolves acoustic attacks to forged levels in place.
void resolve_attacks(NprScenario& scenario);

SimulationResult simulate_scenario(const NprScenario& scenario);
/// Requires separate HVAC and RPM sensors.
SimulationResult simulate_dual_dps(const NprScenario& scenario);
/// Requires at least two rooms sharing a high-pressure port.
SimulationResult simulate_multi_room(const NprScenario& scenario);

void write_trace_csv(std::ostream& os, const SimulationResult& r);
void write_summary(std::ostream& os, const SimulationResult& r);

/// Fixed 6-significant-digit formatting used by every CSV writer.
std::string fmt6(double v);

}  // namespace nprsim

#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nprsim/plant.hpp"

namespace nprsim {

enum class CountermeasureKind { long_tube, enclosure, lpf, raised_setpoint, microphone };

const char* to_string(CountermeasureKind k);
CountermeasureKind countermeasure_kind_from_string(const std::string& s);

namespace cm_defaults {
/// Residual forged pressure below which an attack counts as defeated.
inline constexpr double kNoiseFloorPa = 0.1;
/// Pneumatic lag added by an enclosure, seconds per dB of extra loss.
inline constexpr double kEnclosureLagPerDb = 0.5e-3;
}  // namespace cm_defaults

struct Countermeasure {
  CountermeasureKind kind = CountermeasureKind::long_tube;
  /// long_tube: tube length (m); enclosure: extra loss (dB); lpf: cutoff (Hz);
  /// raised_setpoint: new setpoint (Pa, negative).
  double value = 0.0;
  int order = 1;  // lpf only
  std::optional<PortKind> applied_to;  // every port when empty

  static Countermeasure long_tube(double length_m);
  static Countermeasure enclosure(double extra_loss_db);
  static Countermeasure lpf(double cutoff_hz, int order = 1);
  static Countermeasure raised_setpoint(double setpoint_pa);

  void validate() const;
  std::string describe() const;
};

/// First-order low-pass on a sensor output series. Throws NyquistError when cutoff >= fs/2.
std::vector<double> apply_lpf(std::span<const double> signal, double cutoff_hz, double dt);

struct SensitivityPenalty {
  double baseline_t90_s = 0.0;
  double t90_s = 0.0;
  double added_delay_s = 0.0;
  /// Part of the 1 Pa step missing when the unprotected sensor reaches 90 %.
  double attenuation = 0.0;
};

/// Legitimate 1 Pa step through the protected sensor chain versus the unprotected one.
SensitivityPenalty sensitivity_penalty(const DpsModel& model, const PathModel& path,
                                       const Countermeasure& cm);

struct CountermeasureReport {
  Countermeasure cm;
  double baseline_forged_pa = 0.0;
  double residual_forged_pa = 0.0;
  bool below_noise_floor = false;
  bool baseline_attack_success = false;
  bool attack_success = false;
  std::vector<double> steady_true_pd;
  SensitivityPenalty penalty;
  SimulationResult simulation;
};

/// Scenario copy with the countermeasure applied.
NprScenario apply_countermeasure(const NprScenario& scenario, const Countermeasure& cm);

CountermeasureReport evaluate_countermeasure(const NprScenario& scenario, const Countermeasure& cm);

void write_report(std::ostream& os, const CountermeasureReport& r);
void write_report_csv_header(std::ostream& os);
void write_report_csv_row(std::ostream& os, const CountermeasureReport& r);

}  // namespace nprsim

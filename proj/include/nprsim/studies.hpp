#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nprsim/scenario.hpp"

namespace nprsim {

/// One row of the archetype characterization table.
struct CharacterizationRow {
  std::string part_id;
  double tube_length_m = 0.0;
  double analytic_hz = 0.0;
  std::optional<ResonantBand> detected;  // empty: no resonance in the swept range
  std::string note;

  double delta_hz() const { return detected ? detected->center_hz - analytic_hz : 0.0; }
};

/// Damping used for characterization; resonance needs an underdamped transducer.
inline constexpr double kCharacterizationDamping = 0.05;

CharacterizationRow characterize(const DpsModel& model, const TubeAssembly& tube,
                                 const SweepConfig& cfg = {},
                                 double damping_ratio = kCharacterizationDamping);

void write_characterization_csv_header(std::ostream& os);
void write_characterization_csv_row(std::ostream& os, const CharacterizationRow& row);

enum class SweepAxis { tube_length, tube_diameter, spl, distance, ti, td, pickup };

const char* to_string(SweepAxis a);
/// Throws ValidationError for names outside the supported axes.
SweepAxis sweep_axis_from_string(const std::string& s);
/// Unit of the axis values as written in the CSV header.
const char* axis_unit(SweepAxis a);

/// lo, lo + step, ... up to hi inclusive (within rounding).
std::vector<double> sweep_grid(double lo, double hi, double step);

struct SweepPoint {
  double value = 0.0;
  double resonant_hz = 0.0;
  double forged_pa = 0.0;
  double steady_true_pd = 0.0;
  bool converged = false;
  bool attack_success = false;
};

/// Applies one axis value to every acoustic attack of `file`.
ScenarioFile with_axis_value(const ScenarioFile& file, SweepAxis axis, double value);

/// One forged-pressure estimate and closed-loop run per grid value, in grid order.
std::vector<SweepPoint> run_sweep(const ScenarioFile& file, SweepAxis axis,
                                  const std::vector<double>& values, bool simulate = true);

void write_sweep_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepPoint>& points);

}  // namespace nprsim

#pragma once

#include <string>

#include "nprsim/acoustics.hpp"
#include "nprsim/waveform.hpp"

namespace nprsim {

/// Operating points the path constants are fitted to: a 65 dB phone source (re 1 inch)
/// playing 2 ms bursts every 15 ms must forge `crossing_pa` at `no_tube_distance_m` without
/// a tube and at `tube_distance_m` behind a `tube_length_m` tube.
struct CalibrationTargets {
  std::string part_id = "A1011-00";
  double spl_db = 65.0;
  double ref_distance_m = calib::kPhoneRefDistanceM;
  double duration_s = 2e-3;
  double interval_s = 15e-3;
  double crossing_pa = 2.5;
  double no_tube_distance_m = 0.07;
  double tube_distance_m = 0.025;
  double tube_length_m = 1.0;
};

struct PathCalibration {
  double coupling_gain = 0.0;
  double tube_loss_db_per_m = 0.0;
};

/// Solves coupling gain and per-metre tube loss from the targets. Forged pressure is linear
/// in both factors, so two unit-gain runs determine them exactly.
PathCalibration calibrate_path(const CalibrationTargets& targets = {});

/// Attack tuned to the resonance of (model, path.tube): retunes `base` and runs the
/// forged-pressure pipeline at that frequency.
double forged_at_resonance(const DpsModel& model, const PathModel& path,
                           const AcousticSource& source, const SegmentSchedule& base,
                           ForgedOptions opts = {});

}  // namespace nprsim

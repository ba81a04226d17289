#include "nprsim/calibration.hpp"

#include <cmath>

#include "nprsim/archetypes.hpp"

namespace nprsim {

double forged_at_resonance(const DpsModel& model, const PathModel& path,
                           const AcousticSource& source, const SegmentSchedule& base,
                           ForgedOptions opts) {
  const double f = resonant_hz(model, path.tube);
  opts.target_hz = f;
  return forged_pressure_estimate(retuned_schedule(base, f), model, path, source, opts);
}

PathCalibration calibrate_path(const CalibrationTargets& targets) {
  const DpsModel model = archetype(targets.part_id);
  SegmentSchedule base;
  base.duration_s = targets.duration_s;
  base.interval_s = targets.interval_s;

  auto unit_forged = [&](double distance, double length) {
    PathModel path;
    path.tube.length_m = length;
    path.coupling_gain = 1.0;
    path.loss.ref_db_per_m = 0.0;
    AcousticSource src;
    src.spl_db = targets.spl_db;
    src.ref_distance_m = targets.ref_distance_m;
    src.position_distance_m = distance;
    return forged_at_resonance(model, path, src, base);
  };

  PathCalibration c;
  c.coupling_gain = targets.crossing_pa / unit_forged(targets.no_tube_distance_m, 0.0);
  const double lossless = c.coupling_gain * unit_forged(targets.tube_distance_m, targets.tube_length_m);
  c.tube_loss_db_per_m =
      20.0 * std::log10(lossless / targets.crossing_pa) / targets.tube_length_m;
  return c;
}

}  // namespace nprsim

#include "nprsim/studies.hpp"

#include <cmath>

#include "nprsim/errors.hpp"

namespace nprsim {

CharacterizationRow characterize(const DpsModel& model, const TubeAssembly& tube,
                                 const SweepConfig& cfg, double damping_ratio) {
  const DpsModel m = model.with_damping(damping_ratio);
  CharacterizationRow row;
  row.part_id = model.part_id;
  row.tube_length_m = tube.length_m;
  row.analytic_hz = resonant_hz(m, tube);
  try {
    row.detected = frequency_sweep(m, tube, cfg);
  } catch (const NoResonanceError& e) {
    row.note = e.what();
  }
  return row;
}

void write_characterization_csv_header(std::ostream& os) {
  os << "part_id,tube_length_m,detected_lo_hz,detected_hi_hz,detected_center_hz,analytic_hz,delta_hz,"
        "status\n";
}

void write_characterization_csv_row(std::ostream& os, const CharacterizationRow& row) {
  os << row.part_id << ',' << fmt6(row.tube_length_m) << ',';
  if (row.detected)
    os << fmt6(row.detected->band_hz.lo) << ',' << fmt6(row.detected->band_hz.hi) << ','
       << fmt6(row.detected->center_hz) << ',';
  else
    os << ",,,";
  os << fmt6(row.analytic_hz) << ',' << (row.detected ? fmt6(row.delta_hz()) : "") << ','
     << (row.detected ? "found" : "not_found") << '\n';
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::tube_length: return "tube_length";
    case SweepAxis::tube_diameter: return "tube_diameter";
    case SweepAxis::spl: return "spl";
    case SweepAxis::distance: return "distance";
    case SweepAxis::ti: return "ti";
    case SweepAxis::td: return "td";
    case SweepAxis::pickup: return "pickup";
  }
  return "?";
}

const char* axis_unit(SweepAxis a) {
  switch (a) {
    case SweepAxis::tube_length: return "m";
    case SweepAxis::tube_diameter: return "in";
    case SweepAxis::spl: return "db";
    case SweepAxis::distance: return "m";
    case SweepAxis::ti: return "ms";
    case SweepAxis::td: return "ms";
    case SweepAxis::pickup: return "flag";
  }
  return "";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  for (auto a : {SweepAxis::tube_length, SweepAxis::tube_diameter, SweepAxis::spl, SweepAxis::distance,
                 SweepAxis::ti, SweepAxis::td, SweepAxis::pickup})
    if (s == to_string(a)) return a;
  throw ValidationError("invalid sweep axis '" + s +
                        "' (expected tube_length, tube_diameter, spl, distance, ti, td or pickup)");
}

std::vector<double> sweep_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ValidationError("sweep grid needs step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (n > 100000) throw ValidationError("sweep grid too large");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
  return v;
}

ScenarioFile with_axis_value(const ScenarioFile& file, SweepAxis axis, double value) {
  ScenarioFile f = file;
  bool any = false;
  for (auto& a : f.scenario.attacks) {
    if (!a.acoustic) continue;
    any = true;
    auto& ac = *a.acoustic;
    switch (axis) {
      case SweepAxis::tube_length: ac.path.tube.length_m = value; break;
      case SweepAxis::tube_diameter: ac.path.tube.inner_diameter_m = inches(value); break;
      case SweepAxis::spl: ac.source.spl_db = value; break;
      case SweepAxis::distance: ac.source.position_distance_m = value; break;
      case SweepAxis::ti: ac.schedule.interval_s = value * 1e-3; break;
      case SweepAxis::td: ac.schedule.duration_s = value * 1e-3; break;
      case SweepAxis::pickup: ac.path.tube.pickup_device = value != 0.0; break;
    }
  }
  if (!any) throw ValidationError("sweeps need at least one attack described by an acoustic source");
  return f;
}

std::vector<SweepPoint> run_sweep(const ScenarioFile& file, SweepAxis axis,
                                  const std::vector<double>& values, bool simulate) {
  std::vector<SweepPoint> out;
  out.reserve(values.size());
  for (double v : values) {
    ScenarioFile f = with_axis_value(file, axis, v);
    resolve_attacks(f.scenario);
    SweepPoint p;
    p.value = v;
    for (const auto& a : f.scenario.attacks)
      if (a.acoustic) {
        p.resonant_hz = a.acoustic->target_hz.value_or(resonant_hz(a.acoustic->model, a.acoustic->path.tube));
        p.forged_pa = a.signal.level_pa;
        break;
      }
    if (simulate) {
      const auto r = simulate_scenario(f.scenario);
      p.steady_true_pd = r.steady_true_pd.front();
      p.converged = r.converged;
      p.attack_success = r.any_room_positive();
    }
    out.push_back(p);
  }
  return out;
}

void write_sweep_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepPoint>& points) {
  os << to_string(axis) << '_' << axis_unit(axis)
     << ",resonant_hz,forged_pa,steady_true_pd_pa,converged,attack_success\n";
  for (const auto& p : points)
    os << fmt6(p.value) << ',' << fmt6(p.resonant_hz) << ',' << fmt6(p.forged_pa) << ','
       << fmt6(p.steady_true_pd) << ',' << (p.converged ? 1 : 0) << ',' << (p.attack_success ? 1 : 0)
       << '\n';
}

}  // namespace nprsim

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nprsim/archetypes.hpp"
#include "nprsim/calibration.hpp"
#include "nprsim/countermeasures.hpp"
#include "nprsim/errors.hpp"
#include "nprsim/scenario.hpp"
#include "nprsim/studies.hpp"
#include "nprsim/waveform.hpp"

namespace py = pybind11;
using namespace nprsim;

namespace {

TubeAssembly make_tube(double length_m, double diameter_in, bool pickup) {
  TubeAssembly t;
  t.length_m = length_m;
  t.inner_diameter_m = inches(diameter_in);
  t.pickup_device = pickup;
  return t;
}

py::dict summary_dict(const SimulationResult& r) {
  py::dict d;
  d["scenario"] = r.scenario;
  d["rooms"] = r.room_names;
  d["converged"] = r.converged;
  d["steady_time_s"] = r.steady_time_s;
  d["steady_true_pd"] = r.steady_true_pd;
  d["steady_hvac_measured"] = r.steady_hvac_measured;
  d["steady_rpm_measured"] = r.steady_rpm_measured;
  d["forged_levels"] = r.forged_levels;
  d["alarm_events"] = r.alarms.size();
  d["alarm_raised"] = r.alarm_raised();
  std::ostringstream csv;
  write_trace_csv(csv, r);
  d["trace_csv"] = csv.str();
  return d;
}

}  // namespace

PYBIND11_MODULE(_nprsim, m) {
  m.doc() = "Core of the nprsim simulator";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<ValidationError> validation(m, "ValidationError", base.ptr());
  static py::exception<NoResonanceError> no_res(m, "NoResonanceError", base.ptr());
  static py::exception<ScheduleError> schedule(m, "ScheduleError", base.ptr());
  static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation, e.what());
    } catch (const NoResonanceError& e) {
      py::set_error(no_res, e.what());
    } catch (const ScheduleError& e) {
      py::set_error(schedule, e.what());
    } catch (const ConfigError& e) {
      py::set_error(config, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("archetype_ids", [] {
    std::vector<std::string> ids;
    for (const auto& a : default_archetypes()) ids.push_back(a.part_id);
    return ids;
  });
  m.def("natural_resonant_hz", [](const std::string& id) { return natural_resonant_hz(archetype(id)); },
        py::arg("part_id"));
  m.def("helmholtz_resonant_hz",
        [](const std::string& id, double length_m, double diameter_in) {
          return helmholtz_resonant_hz(archetype(id), make_tube(length_m, diameter_in, false));
        },
        py::arg("part_id"), py::arg("length_m"), py::arg("diameter_in") = 5.0 / 16.0);
  m.def("peak_decay", &peak_decay, py::arg("p0"), py::arg("v0"), py::arg("omega_h"), py::arg("t"));
  m.def("spl_to_pressure_amp", &spl_to_pressure_amp, py::arg("spl_db"));

  m.def("step_response",
        [](const std::string& id, const std::vector<double>& inlet, double dt, double length_m,
           double damping) {
          const auto states =
              step_response(archetype(id).with_damping(damping), make_tube(length_m, 5.0 / 16.0, false), inlet, dt);
          std::vector<double> p(states.size());
          for (std::size_t i = 0; i < states.size(); ++i) p[i] = states[i].p_out;
          return p;
        },
        py::arg("part_id"), py::arg("inlet"), py::arg("dt"), py::arg("length_m") = 0.0,
        py::arg("damping_ratio") = 1.0);

  m.def("characterize",
        [](const std::string& id, double length_m, double lo, double hi, double step, double damping) {
          SweepConfig cfg;
          cfg.lo_hz = lo;
          cfg.hi_hz = hi;
          cfg.step_hz = step;
          const auto row = characterize(archetype(id), make_tube(length_m, 5.0 / 16.0, false), cfg, damping);
          py::dict d;
          d["part_id"] = row.part_id;
          d["analytic_hz"] = row.analytic_hz;
          d["found"] = row.detected.has_value();
          if (row.detected) {
            d["band_hz"] = py::make_tuple(row.detected->band_hz.lo, row.detected->band_hz.hi);
            d["center_hz"] = row.detected->center_hz;
          }
          return d;
        },
        py::arg("part_id"), py::arg("length_m") = 0.0, py::arg("lo_hz") = 50.0, py::arg("hi_hz") = 40000.0,
        py::arg("step_hz") = 10.0, py::arg("damping_ratio") = kCharacterizationDamping);

  m.def("synthesize_attack",
        [](const std::vector<double>& carrier, int rate, std::pair<double, double> band, double td_ms,
           double ti_ms, std::optional<double> target_hz, std::vector<int> cycles) {
          AudioBuffer c;
          c.sample_rate_hz = rate;
          c.samples = carrier;
          SegmentSchedule s;
          s.band_hz = {band.first, band.second};
          s.duration_s = td_ms * 1e-3;
          s.interval_s = ti_ms * 1e-3;
          s.cycles_per_segment = std::move(cycles);
          const double f = target_hz.value_or(s.band_hz.mid());
          const auto a = synthesize_attack_detailed(c, s, f);
          std::vector<std::pair<std::size_t, std::size_t>> spans;
          for (const auto& b : a.bursts) spans.emplace_back(b.first, b.last);
          py::dict d;
          d["samples"] = a.audio.samples;
          d["bursts"] = spans;
          d["end_at_peak"] = bursts_end_at_peak(a, f);
          d["psd_ratio"] = psd_ratio(a.audio, s.band_hz, burst_mask(a.bursts, a.audio.samples.size()));
          return d;
        },
        py::arg("carrier"), py::arg("sample_rate_hz"), py::arg("band_hz"), py::arg("td_ms"), py::arg("ti_ms"),
        py::arg("target_hz") = py::none(), py::arg("cycles") = std::vector<int>{});

  m.def("calibration_carrier",
        [](double seconds, int rate, std::uint64_t seed) { return calibration_carrier(seconds, rate, seed).samples; },
        py::arg("seconds"), py::arg("sample_rate_hz") = 48000, py::arg("seed") = 7);

  m.def("forged_pressure",
        [](const std::string& id, double length_m, double spl_db, double distance_m, double td_ms, double ti_ms,
           double ref_distance_m, bool pickup, double post_lpf_hz) {
          PathModel path;
          path.tube = make_tube(length_m, 5.0 / 16.0, pickup);
          AcousticSource src;
          src.spl_db = spl_db;
          src.ref_distance_m = ref_distance_m;
          src.position_distance_m = distance_m;
          SegmentSchedule base;
          base.duration_s = td_ms * 1e-3;
          base.interval_s = ti_ms * 1e-3;
          ForgedOptions o;
          o.post_lpf_hz = post_lpf_hz;
          return forged_at_resonance(archetype(id), path, src, base, o);
        },
        py::arg("part_id") = "A1011-00", py::arg("length_m") = 1.0, py::arg("spl_db") = 65.0,
        py::arg("distance_m") = 0.002, py::arg("td_ms") = 2.0, py::arg("ti_ms") = 15.0,
        py::arg("ref_distance_m") = calib::kPhoneRefDistanceM, py::arg("pickup") = false,
        py::arg("post_lpf_hz") = 0.0);

  m.def("measured_differential",
        [](double p_low, double hallway, double forged_low, double forged_high) {
          RoomState r;
          r.pressure_pa = p_low;
          return measured_differential(r, hallway, forged_low, forged_high);
        },
        py::arg("p_low"), py::arg("hallway_pa"), py::arg("forged_low") = 0.0, py::arg("forged_high") = 0.0);

  m.def("simulate_file", [](const std::string& path) { return summary_dict(simulate_scenario(load_scenario(path).scenario)); },
        py::arg("path"));
  m.def("simulate_text",
        [](const std::string& text) { return summary_dict(simulate_scenario(parse_scenario(text).scenario)); },
        py::arg("text"));

  m.def("evaluate_countermeasure",
        [](const std::string& path, const std::string& kind, double value) {
          Countermeasure cm;
          cm.kind = countermeasure_kind_from_string(kind);
          cm.value = value;
          const auto r = evaluate_countermeasure(load_scenario(path).scenario, cm);
          py::dict d;
          d["baseline_forged_pa"] = r.baseline_forged_pa;
          d["residual_forged_pa"] = r.residual_forged_pa;
          d["below_noise_floor"] = r.below_noise_floor;
          d["attack_success"] = r.attack_success;
          d["steady_true_pd"] = r.steady_true_pd;
          d["added_delay_s"] = r.penalty.added_delay_s;
          d["attenuation"] = r.penalty.attenuation;
          return d;
        },
        py::arg("path"), py::arg("kind"), py::arg("value"));

  m.def("sweep",
        [](const std::string& path, const std::string& axis, const std::vector<double>& values, bool simulate) {
          const auto a = sweep_axis_from_string(axis);
          std::ostringstream csv;
          write_sweep_csv(csv, a, run_sweep(load_scenario(path), a, values, simulate));
          return csv.str();
        },
        py::arg("path"), py::arg("axis"), py::arg("values"), py::arg("simulate") = true);

  m.attr("COUPLING_GAIN") = calib::kCouplingGain;
  m.attr("TUBE_LOSS_DB_PER_M") = calib::kTubeLossDbPerM;
}

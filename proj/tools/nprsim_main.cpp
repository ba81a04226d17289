// nprsim command line: simulate, synth, characterize, sweep, evaluate-cm.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nprsim/archetypes.hpp"
#include "nprsim/countermeasures.hpp"
#include "nprsim/errors.hpp"
#include "nprsim/scenario.hpp"
#include "nprsim/studies.hpp"
#include "nprsim/waveform.hpp"

namespace fs = std::filesystem;
using namespace nprsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

Interval parse_band(const std::string& s) {
  const auto cut = s.find_first_of(",:-", 1);
  if (cut == std::string::npos) throw ValidationError("band must look like LO-HI, e.g. 680-690");
  try {
    return {std::stod(s.substr(0, cut)), std::stod(s.substr(cut + 1))};
  } catch (const std::exception&) {
    throw ValidationError("cannot parse band '" + s + "'");
  }
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + p.string());
  out << content;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw ValidationError("cannot create output directory " + dir.string());
}

struct SimulateArgs {
  std::string scenario;
  std::string out = "out";
  std::optional<double> horizon, setpoint, noise;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a) {
  ScenarioFile f = load_scenario(a.scenario);
  if (a.horizon) f.scenario.horizon_s = *a.horizon;
  if (a.seed) f.scenario.seed = *a.seed;
  if (a.noise) f.scenario.sensor_noise_pa = *a.noise;
  if (a.setpoint)
    for (auto& r : f.scenario.rooms) {
      r.controller.setpoint_pa = *a.setpoint;
      r.state.pressure_pa = f.scenario.hallway_pa + *a.setpoint;
    }
  const SimulationResult r = simulate_scenario(f.scenario);

  std::ostringstream trace, summary;
  write_trace_csv(trace, r);
  write_summary(summary, r);
  ensure_dir(a.out);
  write_file(fs::path(a.out) / "trace.csv", trace.str());
  write_file(fs::path(a.out) / "summary.txt", summary.str());
  std::cout << summary.str();
  if (!r.converged) {
    std::cerr << "warning: no steady state within the " << f.scenario.horizon_s << " s horizon\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

struct SynthArgs {
  std::string carrier;
  double silent_s = 0.0;
  std::string band;
  double td_ms = 2.0, ti_ms = 15.0;
  std::vector<int> cycles;
  std::optional<double> target_hz;
  double amplitude_scale = 0.9;
  double fade_ms = 0.25;
  std::string out;
  std::string report;
};

int cmd_synth(const SynthArgs& a) {
  SegmentSchedule s;
  s.band_hz = parse_band(a.band);
  s.duration_s = a.td_ms * 1e-3;
  s.interval_s = a.ti_ms * 1e-3;
  s.cycles_per_segment = a.cycles;
  s.amplitude_scale = a.amplitude_scale;
  s.fade_in_s = a.fade_ms * 1e-3;
  const double target = a.target_hz.value_or(s.band_hz.mid());
  s.validate(target);

  AudioBuffer carrier;
  if (!a.carrier.empty()) carrier = read_wav(a.carrier);
  else if (a.silent_s > 0.0) carrier = silent_carrier(a.silent_s);
  else throw ValidationError("give --carrier WAV or --silent SECONDS");

  const AttackAudio attack = synthesize_attack_detailed(carrier, s, target);
  const double ratio = psd_ratio(attack.audio, s.band_hz, burst_mask(attack.bursts, attack.audio.samples.size()));
  const bool peaks = bursts_end_at_peak(attack, target);

  std::ostringstream rep;
  rep << "target_hz: " << fmt6(target) << '\n'
      << "band_hz: " << fmt6(s.band_hz.lo) << '-' << fmt6(s.band_hz.hi) << '\n'
      << "td_ms: " << fmt6(a.td_ms) << "\nti_ms: " << fmt6(a.ti_ms) << '\n'
      << "bursts: " << attack.bursts.size() << '\n'
      << "burst_amplitude: " << fmt6(attack.burst_amplitude) << '\n'
      << "psd_ratio: " << fmt6(ratio) << (ratio >= kPsdRatioCap ? " (capped)" : "") << '\n'
      << "end_at_peak: " << (peaks ? "pass" : "fail") << '\n';
  write_wav(a.out, attack.audio);
  if (!a.report.empty()) write_file(a.report, rep.str());
  std::cout << rep.str();
  return peaks ? kExitOk : kExitValidation;
}

struct CharacterizeArgs {
  std::string archetype;
  bool all = false;
  std::vector<double> lengths;
  double diameter_in = 5.0 / 16.0;
  bool pickup = false;
  double lo = 50, hi = 40000, step = 10, dwell_ms = 3;
  double damping = kCharacterizationDamping;
  std::string csv;
};

int cmd_characterize(const CharacterizeArgs& a) {
  std::vector<DpsModel> models;
  const auto pool = default_archetypes();
  if (a.all) models = pool;
  else if (!a.archetype.empty()) models.push_back(find_archetype(pool, a.archetype));
  else throw ValidationError("give --archetype ID or --all");
  const std::vector<double> lengths = a.lengths.empty() ? std::vector<double>{0.0} : a.lengths;

  SweepConfig cfg;
  cfg.lo_hz = a.lo;
  cfg.hi_hz = a.hi;
  cfg.step_hz = a.step;
  cfg.dwell_s = a.dwell_ms * 1e-3;

  std::ostringstream csv;
  write_characterization_csv_header(csv);
  for (const auto& m : models)
    for (double L : lengths) {
      TubeAssembly tube;
      tube.length_m = L;
      tube.inner_diameter_m = inches(a.diameter_in);
      tube.pickup_device = a.pickup;
      const auto row = characterize(m, tube, cfg, a.damping);
      write_characterization_csv_row(csv, row);
      std::cout << row.part_id << "  L=" << fmt6(L) << " m  ";
      if (row.detected)
        std::cout << "band " << fmt6(row.detected->band_hz.lo) << "-" << fmt6(row.detected->band_hz.hi)
                  << " Hz, analytic " << fmt6(row.analytic_hz) << " Hz, delta " << fmt6(row.delta_hz())
                  << " Hz\n";
      else
        std::cout << "not found (analytic " << fmt6(row.analytic_hz) << " Hz)\n";
    }
  if (!a.csv.empty()) write_file(a.csv, csv.str());
  return kExitOk;
}

struct SweepArgs {
  std::string scenario;
  std::string axis;
  std::optional<double> from, to, step;
  std::vector<double> values;
  std::string out;
  bool no_simulate = false;
};

int cmd_sweep(const SweepArgs& a) {
  const SweepAxis axis = sweep_axis_from_string(a.axis);
  std::vector<double> values = a.values;
  if (values.empty()) {
    if (!a.from || !a.to || !a.step) throw ValidationError("give --values or --from/--to/--step");
    values = sweep_grid(*a.from, *a.to, *a.step);
  }
  const ScenarioFile f = load_scenario(a.scenario);
  const auto points = run_sweep(f, axis, values, !a.no_simulate);
  std::ostringstream csv;
  write_sweep_csv(csv, axis, points);
  if (!a.out.empty()) write_file(a.out, csv.str());
  std::cout << csv.str();
  return kExitOk;
}

struct CmArgs {
  std::string scenario;
  std::vector<std::string> cms;
  std::string out = "out";
};

Countermeasure parse_cm_flag(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw ValidationError("countermeasure must look like KIND=VALUE");
  Countermeasure cm;
  cm.kind = countermeasure_kind_from_string(s.substr(0, eq));
  try {
    cm.value = std::stod(s.substr(eq + 1));
  } catch (const std::exception&) {
    throw ValidationError("bad countermeasure value in '" + s + "'");
  }
  cm.validate();
  return cm;
}

int cmd_evaluate_cm(const CmArgs& a) {
  const ScenarioFile f = load_scenario(a.scenario);
  std::vector<Countermeasure> cms;
  for (const auto& s : a.cms) cms.push_back(parse_cm_flag(s));
  if (cms.empty()) cms = f.countermeasures;
  if (cms.empty()) throw ValidationError("scenario declares no countermeasures and none were given");

  std::ostringstream text, csv;
  write_report_csv_header(csv);
  for (const auto& cm : cms) {
    const auto rep = evaluate_countermeasure(f.scenario, cm);
    write_report(text, rep);
    text << '\n';
    write_report_csv_row(csv, rep);
  }
  ensure_dir(a.out);
  write_file(fs::path(a.out) / "countermeasures.txt", text.str());
  write_file(fs::path(a.out) / "countermeasures.csv", csv.str());
  std::cout << text.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic resonance attack simulator for negative-pressure rooms"};
  app.require_subcommand(1);
  std::string archetype_dir;
  app.add_option("--archetype-dir", archetype_dir,
                 std::string("directory holding archetypes.json (default: $") + kArchetypeDirEnv + ")");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "run a scenario and write trace.csv and summary.txt");
  s->add_option("scenario", sim.scenario, "scenario JSON")->required();
  s->add_option("-o,--out", sim.out, "output directory");
  s->add_option("--horizon", sim.horizon, "override horizon_s");
  s->add_option("--seed", sim.seed, "override seed");
  s->add_option("--setpoint", sim.setpoint, "override every room setpoint (Pa)");
  s->add_option("--noise", sim.noise, "override sensor_noise_pa");

  SynthArgs syn;
  auto* y = app.add_subcommand("synth", "insert resonant bursts into a carrier WAV");
  y->add_option("--carrier", syn.carrier, "carrier WAV (16-bit PCM)");
  y->add_option("--silent", syn.silent_s, "use a silent carrier of this many seconds");
  y->add_option("--band", syn.band, "resonant band LO-HI in Hz")->required();
  y->add_option("--td-ms", syn.td_ms, "segment duration T_D");
  y->add_option("--ti-ms", syn.ti_ms, "segment interval T_I");
  y->add_option("--cycles", syn.cycles, "cycles per segment, cycled over bursts")->delimiter(',');
  y->add_option("--target-hz", syn.target_hz, "burst frequency (default band midpoint)");
  y->add_option("--amplitude-scale", syn.amplitude_scale, "burst level relative to the carrier peak");
  y->add_option("--fade-ms", syn.fade_ms, "burst fade-in");
  y->add_option("-o,--out", syn.out, "output WAV")->required();
  y->add_option("--report", syn.report, "write the PSD report here too");

  CharacterizeArgs ch;
  auto* c = app.add_subcommand("characterize", "frequency-sweep a sensor archetype");
  c->add_option("--archetype", ch.archetype, "part id");
  c->add_flag("--all", ch.all, "every known archetype");
  c->add_option("--tube-length", ch.lengths, "tube length(s) in m, 0 for none")->delimiter(',');
  c->add_option("--diameter-in", ch.diameter_in, "tube inner diameter in inches");
  c->add_flag("--pickup", ch.pickup, "pickup device fitted");
  c->add_option("--lo", ch.lo, "sweep start (Hz)");
  c->add_option("--hi", ch.hi, "sweep end (Hz)");
  c->add_option("--step", ch.step, "sweep step (Hz)");
  c->add_option("--dwell-ms", ch.dwell_ms, "dwell per tone");
  c->add_option("--damping", ch.damping, "damping ratio used for the sweep");
  c->add_option("--csv", ch.csv, "write the table as CSV");

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "sweep one scenario parameter");
  w->add_option("scenario", sw.scenario, "scenario JSON")->required();
  w->add_option("--axis", sw.axis, "tube_length|tube_diameter|spl|distance|ti|td|pickup")->required();
  w->add_option("--from", sw.from, "first grid value");
  w->add_option("--to", sw.to, "last grid value");
  w->add_option("--step", sw.step, "grid step");
  w->add_option("--values", sw.values, "explicit grid")->delimiter(',');
  w->add_option("-o,--out", sw.out, "output CSV");
  w->add_flag("--no-simulate", sw.no_simulate, "forged pressure only, skip the closed loop");

  CmArgs cm;
  auto* e = app.add_subcommand("evaluate-cm", "evaluate countermeasures against a scenario");
  e->add_option("scenario", cm.scenario, "scenario JSON")->required();
  e->add_option("--cm", cm.cms, "KIND=VALUE, e.g. long_tube=7.5 or lpf=120");
  e->add_option("-o,--out", cm.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kExitValidation;
  }

  if (!archetype_dir.empty()) setenv(kArchetypeDirEnv, archetype_dir.c_str(), 1);

  try {
    if (*s) return cmd_simulate(sim);
    if (*y) return cmd_synth(syn);
    if (*c) return cmd_characterize(ch);
    if (*w) return cmd_sweep(sw);
    if (*e) return cmd_evaluate_cm(cm);
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

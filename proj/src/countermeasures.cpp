#include "nprsim/countermeasures.hpp"

#include <algorithm>
#include <cmath>

#include "nprsim/archetypes.hpp"
#include "nprsim/errors.hpp"
#include "nprsim/spectral.hpp"

namespace nprsim {
namespace {

bool applies(const Countermeasure& cm, const Attack& a) {
  return !cm.applied_to || *cm.applied_to == a.port;
}

double max_level(const NprScenario& sc) {
  double m = 0.0;
  for (const auto& a : sc.attacks) m = std::max(m, std::abs(a.signal.level_pa));
  return m;
}

// Time at which a step response first reaches 90 % of its final value.
double t90(const std::vector<double>& y, double dt) {
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] >= 0.9) return static_cast<double>(i) * dt;
  return static_cast<double>(y.size()) * dt;
}

std::vector<double> legit_step(const DpsModel& model, const PathModel& path, double lag_s,
                               double lpf_hz, double dt, std::size_t n) {
  std::vector<double> inlet(n, 1.0);
  inlet[0] = 0.0;
  if (lag_s > 0.0) {
    // pneumatic lag ahead of the transducer
    const double a = std::exp(-dt / lag_s);
    double y = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      y = a * y + (1.0 - a) * 1.0;
      inlet[i] = y;
    }
  }
  const auto states = step_response(model, path.tube, inlet, dt);
  std::vector<double> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) out[i] = states[i].p_out;
  if (lpf_hz > 0.0) out = spectral::lowpass_first_order(out, lpf_hz, dt);
  return out;
}

}  // namespace

const char* to_string(CountermeasureKind k) {
  switch (k) {
    case CountermeasureKind::long_tube: return "long_tube";
    case CountermeasureKind::enclosure: return "enclosure";
    case CountermeasureKind::lpf: return "lpf";
    case CountermeasureKind::raised_setpoint: return "raised_setpoint";
    case CountermeasureKind::microphone: return "microphone";
  }
  return "?";
}

CountermeasureKind countermeasure_kind_from_string(const std::string& s) {
  for (auto k : {CountermeasureKind::long_tube, CountermeasureKind::enclosure, CountermeasureKind::lpf,
                 CountermeasureKind::raised_setpoint, CountermeasureKind::microphone})
    if (s == to_string(k)) return k;
  throw ValidationError("unknown countermeasure kind '" + s + "'");
}

Countermeasure Countermeasure::long_tube(double length_m) {
  return {CountermeasureKind::long_tube, length_m, 1, std::nullopt};
}
Countermeasure Countermeasure::enclosure(double extra_loss_db) {
  return {CountermeasureKind::enclosure, extra_loss_db, 1, std::nullopt};
}
Countermeasure Countermeasure::lpf(double cutoff_hz, int order) {
  return {CountermeasureKind::lpf, cutoff_hz, order, std::nullopt};
}
Countermeasure Countermeasure::raised_setpoint(double setpoint_pa) {
  return {CountermeasureKind::raised_setpoint, setpoint_pa, 1, std::nullopt};
}

void Countermeasure::validate() const {
  switch (kind) {
    case CountermeasureKind::long_tube:
      if (!(value > 0.0)) throw ValidationError("long_tube length must be > 0");
      break;
    case CountermeasureKind::enclosure:
      if (!(value >= 0.0)) throw ValidationError("enclosure loss must be >= 0");
      break;
    case CountermeasureKind::lpf:
      if (!(value > 0.0)) throw ValidationError("lpf cutoff must be > 0");
      if (order != 1) throw ValidationError("only first-order lpf is supported");
      break;
    case CountermeasureKind::raised_setpoint:
      if (!(value < 0.0)) throw ValidationError("raised setpoint must be negative");
      break;
    case CountermeasureKind::microphone:
      throw ValidationError("microphone countermeasure is reserved and not implemented");
  }
}

std::string Countermeasure::describe() const {
  std::string s = to_string(kind);
  s += "(" + fmt6(value) + ")";
  if (applied_to) s += std::string("@") + to_string(*applied_to);
  return s;
}

std::vector<double> apply_lpf(std::span<const double> signal, double cutoff_hz, double dt) {
  return spectral::lowpass_first_order(signal, cutoff_hz, dt);
}

SensitivityPenalty sensitivity_penalty(const DpsModel& model, const PathModel& path,
                                       const Countermeasure& cm) {
  cm.validate();
  PathModel protected_path = path;
  double lag = 0.0, lpf = 0.0;
  switch (cm.kind) {
    case CountermeasureKind::long_tube: protected_path.tube.length_m = cm.value; break;
    case CountermeasureKind::enclosure: lag = cm_defaults::kEnclosureLagPerDb * cm.value; break;
    case CountermeasureKind::lpf: lpf = cm.value; break;
    default: break;
  }
  const double f = std::max(resonant_hz(model, path.tube), resonant_hz(model, protected_path.tube));
  const double dt = std::min(max_stable_dt(f), 1.0 / model.sample_rate_hz);
  const auto n = static_cast<std::size_t>(0.5 / dt);
  const auto base = legit_step(model, path, 0.0, 0.0, dt, n);
  const auto prot = legit_step(model, protected_path, lag, lpf, dt, n);

  SensitivityPenalty p;
  p.baseline_t90_s = t90(base, dt);
  p.t90_s = t90(prot, dt);
  p.added_delay_s = p.t90_s - p.baseline_t90_s;
  const auto k = std::min(prot.size() - 1, static_cast<std::size_t>(std::llround(p.baseline_t90_s / dt)));
  p.attenuation = std::max(0.0, base[k] - prot[k]);
  return p;
}

NprScenario apply_countermeasure(const NprScenario& scenario, const Countermeasure& cm) {
  cm.validate();
  NprScenario sc = scenario;
  if (cm.kind == CountermeasureKind::raised_setpoint) {
    for (auto& room : sc.rooms) {
      room.controller.setpoint_pa = cm.value;
      room.initial_speeds.reset();
      room.state.pressure_pa = sc.hallway_pa + cm.value;
    }
    return sc;
  }
  for (auto& a : sc.attacks) {
    if (!applies(cm, a)) continue;
    if (!a.acoustic)
      throw ValidationError(std::string(to_string(cm.kind)) +
                            " needs attacks described by an acoustic source, not a forged level");
    auto& ac = *a.acoustic;
    switch (cm.kind) {
      case CountermeasureKind::long_tube:
        ac.path.tube.length_m = cm.value;
        ac.target_hz.reset();  // the attacker retunes to the new resonance
        break;
      case CountermeasureKind::enclosure: ac.path.extra_loss_db += cm.value; break;
      case CountermeasureKind::lpf: ac.post_lpf_hz = cm.value; break;
      default: break;
    }
  }
  return sc;
}

CountermeasureReport evaluate_countermeasure(const NprScenario& scenario, const Countermeasure& cm) {
  cm.validate();
  CountermeasureReport rep;
  rep.cm = cm;

  NprScenario base = scenario;
  resolve_attacks(base);
  rep.baseline_forged_pa = max_level(base);
  const auto base_sim = simulate_scenario(base);
  rep.baseline_attack_success = base_sim.any_room_positive();

  NprScenario prot = apply_countermeasure(scenario, cm);
  resolve_attacks(prot);
  rep.residual_forged_pa = max_level(prot);
  rep.below_noise_floor = rep.residual_forged_pa < cm_defaults::kNoiseFloorPa;
  rep.simulation = simulate_scenario(prot);
  rep.steady_true_pd = rep.simulation.steady_true_pd;
  rep.attack_success = rep.simulation.any_room_positive();

  DpsModel model = archetype("A1011-00");
  PathModel path;
  path.tube.length_m = 1.0;
  for (const auto& a : scenario.attacks)
    if (a.acoustic && applies(cm, a)) {
      model = a.acoustic->model;
      path = a.acoustic->path;
      break;
    }
  rep.penalty = sensitivity_penalty(model, path, cm);
  return rep;
}

void write_report(std::ostream& os, const CountermeasureReport& r) {
  os << "countermeasure: " << r.cm.describe() << '\n';
  os << "baseline_forged_pa: " << fmt6(r.baseline_forged_pa) << '\n';
  os << "residual_forged_pa: " << fmt6(r.residual_forged_pa)
     << (r.below_noise_floor ? " (below noise floor)" : "") << '\n';
  os << "baseline_attack_success: " << (r.baseline_attack_success ? "true" : "false") << '\n';
  os << "attack_success: " << (r.attack_success ? "true" : "false") << '\n';
  for (std::size_t i = 0; i < r.steady_true_pd.size(); ++i)
    os << "room " << r.simulation.room_names[i] << " steady_true_pd_pa: " << fmt6(r.steady_true_pd[i]) << '\n';
  os << "legit_step_t90_s: " << fmt6(r.penalty.t90_s) << " (unprotected " << fmt6(r.penalty.baseline_t90_s)
     << ")\n";
  os << "sensitivity_added_delay_s: " << fmt6(r.penalty.added_delay_s) << '\n';
  os << "sensitivity_attenuation: " << fmt6(r.penalty.attenuation) << '\n';
}

void write_report_csv_header(std::ostream& os) {
  os << "countermeasure,value,baseline_forged_pa,residual_forged_pa,below_noise_floor,"
        "baseline_attack_success,attack_success,min_steady_true_pd,max_steady_true_pd,"
        "added_delay_s,attenuation\n";
}

void write_report_csv_row(std::ostream& os, const CountermeasureReport& r) {
  const auto [mn, mx] = std::minmax_element(r.steady_true_pd.begin(), r.steady_true_pd.end());
  os << to_string(r.cm.kind) << ',' << fmt6(r.cm.value) << ',' << fmt6(r.baseline_forged_pa) << ','
     << fmt6(r.residual_forged_pa) << ',' << (r.below_noise_floor ? 1 : 0) << ','
     << (r.baseline_attack_success ? 1 : 0) << ',' << (r.attack_success ? 1 : 0) << ','
     << fmt6(r.steady_true_pd.empty() ? 0.0 : *mn) << ',' << fmt6(r.steady_true_pd.empty() ? 0.0 : *mx)
     << ',' << fmt6(r.penalty.added_delay_s) << ',' << fmt6(r.penalty.attenuation) << '\n';
}

}  // namespace nprsim

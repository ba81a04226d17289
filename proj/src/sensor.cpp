#include "nprsim/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nprsim/errors.hpp"

namespace nprsim {

const char* to_string(Transducer t) {
  switch (t) {
    case Transducer::capacitive:
      return "capacitive";
    case Transducer::piezoresistive:
      return "piezoresistive";
    case Transducer::thermal_mass_flow:
      return "thermal_mass_flow";
  }
  return "unknown";
}

Transducer transducer_from_string(const std::string& s) {
  if (s == "capacitive") return Transducer::capacitive;
  if (s == "piezoresistive") return Transducer::piezoresistive;
  if (s == "thermal_mass_flow") return Transducer::thermal_mass_flow;
  throw ValidationError("unknown transducer '" + s + "'");
}

namespace calib {

double effective_internal_volume() {
  const double area = std::numbers::pi * kReferenceTubeDiameterM * kReferenceTubeDiameterM / 4.0;
  // f_h / f_r = v * sqrt(A / (L V))
  return kSoundSpeedMps * kSoundSpeedMps * area /
         (kReferenceTubeRatio * kReferenceTubeRatio * kReferenceTubeLengthM);
}

}  // namespace calib

DpsModel DpsModel::calibrated(std::string part_id, Transducer transducer, Interval pressure_range,
                              Interval band, double damping_ratio, double sample_rate_hz) {
  DpsModel m;
  m.part_id = std::move(part_id);
  m.transducer = transducer;
  m.pressure_range_pa = pressure_range;
  m.base_resonant_hz = band;
  m.damping_ratio = damping_ratio;
  m.moving_mass = calib::kMovingMassKg;
  const double omega = kTwoPi * band.mid();
  m.diaphragm_stiffness = m.moving_mass * omega * omega;
  m.internal_volume = calib::effective_internal_volume();
  m.sample_rate_hz = sample_rate_hz;
  m.validate();
  return m;
}

DpsModel DpsModel::with_damping(double xi) const {
  DpsModel m = *this;
  m.damping_ratio = xi;
  m.validate();
  return m;
}

void DpsModel::validate() const {
  auto fail = [this](const std::string& msg) {
    throw ValidationError("DpsModel '" + part_id + "': " + msg);
  };
  if (!(pressure_range_pa.lo < pressure_range_pa.hi)) fail("pressure_range lower must be < upper");
  if (!(base_resonant_hz.lo <= base_resonant_hz.hi)) fail("base_resonant_hz lower must be <= upper");
  if (!(base_resonant_hz.lo > 0.0)) fail("base_resonant_hz must be positive");
  if (!(damping_ratio >= 0.0) || !std::isfinite(damping_ratio)) fail("damping_ratio must be >= 0");
  if (!(diaphragm_stiffness > 0.0)) fail("diaphragm_stiffness must be > 0");
  if (!(moving_mass > 0.0)) fail("moving_mass must be > 0");
  if (!(internal_volume > 0.0)) fail("internal_volume must be > 0");
  if (!(sample_rate_hz > 0.0)) fail("sample_rate_hz must be > 0");
  const double fr = natural_resonant_hz(*this);
  if (std::abs(fr - base_resonant_hz.mid()) > 0.01 * base_resonant_hz.mid()) {
    std::ostringstream os;
    os << "S and M give " << fr << " Hz, more than 1% away from band midpoint "
       << base_resonant_hz.mid() << " Hz";
    fail(os.str());
  }
}

double TubeAssembly::cross_section_m2() const {
  return std::numbers::pi * inner_diameter_m * inner_diameter_m / 4.0;
}

void TubeAssembly::validate() const {
  if (!(length_m >= 0.0) || !std::isfinite(length_m))
    throw ValidationError("tube length must be >= 0");
  if (!(inner_diameter_m > 0.0)) throw ValidationError("tube inner diameter must be > 0");
  if (!(sound_speed_mps > 0.0)) throw ValidationError("sound speed must be > 0");
}

double natural_resonant_hz(const DpsModel& model) {
  return std::sqrt(model.diaphragm_stiffness / model.moving_mass) / kTwoPi;
}

double helmholtz_resonant_hz(const DpsModel& model, const TubeAssembly& tube) {
  tube.validate();
  if (!tube.present())
    throw ValidationError("helmholtz_resonant_hz needs a tube; use natural_resonant_hz");
  const double a = tube.cross_section_m2();
  return tube.sound_speed_mps *
         std::sqrt(a * model.diaphragm_stiffness /
                   (tube.length_m * model.internal_volume * model.moving_mass)) /
         kTwoPi;
}

double resonant_hz(const DpsModel& model, const TubeAssembly& tube) {
  return tube.present() ? helmholtz_resonant_hz(model, tube) : natural_resonant_hz(model);
}

HelmholtzIntegrator::HelmholtzIntegrator(double omega, double damping_ratio)
    : omega_(omega), xi_(damping_ratio) {}

void HelmholtzIntegrator::reset(double p, double rate) {
  p_ = p;
  rate_ = rate;
}

void HelmholtzIntegrator::step(double u0, double u_mid, double u1, double dt) {
  const double w2 = omega_ * omega_;
  const double c = 2.0 * xi_ * omega_;
  auto accel = [&](double p, double r, double u) { return w2 * (u - p) - c * r; };

  const double k1p = rate_;
  const double k1r = accel(p_, rate_, u0);
  const double k2p = rate_ + 0.5 * dt * k1r;
  const double k2r = accel(p_ + 0.5 * dt * k1p, k2p, u_mid);
  const double k3p = rate_ + 0.5 * dt * k2r;
  const double k3r = accel(p_ + 0.5 * dt * k2p, k3p, u_mid);
  const double k4p = rate_ + dt * k3r;
  const double k4r = accel(p_ + dt * k3p, k4p, u1);

  p_ += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  rate_ += dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
}

double max_stable_dt(double f_h) { return 1.0 / (20.0 * f_h); }

namespace {

void check_step(double f_h, double dt) {
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  if (dt > max_stable_dt(f_h) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt = " << dt << " s does not resolve f_h = " << f_h << " Hz (need dt <= "
       << max_stable_dt(f_h) << " s)";
    throw UnstableStepError(os.str());
  }
}

// Inlet value at the midpoint of [i, i+1], cubic where a 4-point stencil exists.
double midpoint(std::span<const double> u, std::size_t i) {
  const std::size_t n = u.size();
  if (n < 3) return 0.5 * (u[i] + u[i + 1]);
  if (i == 0) return (3.0 * u[0] + 6.0 * u[1] - u[2]) / 8.0;
  if (i + 2 >= n) return (-u[i - 1] + 6.0 * u[i] + 3.0 * u[i + 1]) / 8.0;
  return (-u[i - 1] + 9.0 * u[i] + 9.0 * u[i + 1] - u[i + 2]) / 16.0;
}

}  // namespace

std::vector<TransducerState> step_response(const DpsModel& model, const TubeAssembly& tube,
                                           std::span<const double> inlet, double dt) {
  const double f_h = resonant_hz(model, tube);
  check_step(f_h, dt);
  for (double u : inlet)
    if (!std::isfinite(u)) throw NonFiniteInputError("inlet pressure contains non-finite values");

  std::vector<TransducerState> out(inlet.size());
  if (inlet.empty()) return out;
  HelmholtzIntegrator integ(kTwoPi * f_h, model.damping_ratio);
  for (std::size_t i = 0; i + 1 < inlet.size(); ++i) {
    integ.step(inlet[i], midpoint(inlet, i), inlet[i + 1], dt);
    out[i + 1] = {integ.p(), integ.rate(), static_cast<double>(i + 1) * dt};
  }
  return out;
}

std::vector<TransducerState> step_response(const DpsModel& model, const TubeAssembly& tube,
                                           const std::function<double(double)>& inlet,
                                           std::size_t samples, double dt) {
  const double f_h = resonant_hz(model, tube);
  check_step(f_h, dt);
  std::vector<TransducerState> out(samples);
  HelmholtzIntegrator integ(kTwoPi * f_h, model.damping_ratio);
  for (std::size_t i = 0; i + 1 < samples; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double u0 = inlet(t), um = inlet(t + 0.5 * dt), u1 = inlet(t + dt);
    if (!std::isfinite(u0) || !std::isfinite(um) || !std::isfinite(u1))
      throw NonFiniteInputError("inlet pressure is non-finite at t = " + std::to_string(t));
    integ.step(u0, um, u1, dt);
    out[i + 1] = {integ.p(), integ.rate(), t + dt};
  }
  return out;
}

double peak_decay(double p0, double v0, double omega_h, double t) {
  const double e = std::exp(-omega_h * t);
  return p0 * e + (omega_h * p0 + v0) * t * e;
}

namespace {

// Steady-state peak amplitude for one tone, from rest, after the transient has died out.
double tone_peak(double f, double f_h, double xi, const SweepConfig& cfg) {
  const double omega_h = kTwoPi * f_h;
  const double omega_f = kTwoPi * f;
  const double dt = std::min(max_stable_dt(f_h), 1.0 / (20.0 * f));
  const double settle_s = 6.0 / (xi * omega_h);
  const auto n_settle = static_cast<std::size_t>(std::ceil(settle_s / dt));
  const auto n_dwell = static_cast<std::size_t>(std::ceil(cfg.dwell_s / dt));

  HelmholtzIntegrator integ(omega_h, xi);
  // Tone phasor advanced by half steps: u = A sin(w t).
  const double half = 0.5 * omega_f * dt;
  const double ch = std::cos(half), sh = std::sin(half);
  double c = 1.0, s = 0.0;
  double peak = 0.0;
  const std::size_t total = n_settle + n_dwell;
  for (std::size_t i = 0; i < total; ++i) {
    const double u0 = cfg.amplitude_pa * s;
    double c1 = c * ch - s * sh, s1 = s * ch + c * sh;
    const double um = cfg.amplitude_pa * s1;
    double c2 = c1 * ch - s1 * sh, s2 = s1 * ch + c1 * sh;
    const double u1 = cfg.amplitude_pa * s2;
    integ.step(u0, um, u1, dt);
    c = c2;
    s = s2;
    if ((i & 1023) == 0) {
      const double norm = std::hypot(c, s);
      c /= norm;
      s /= norm;
    }
    if (i >= n_settle) {
      const double r = integ.rate() / omega_f;
      peak = std::max(peak, std::sqrt(integ.p() * integ.p() + r * r));
    }
  }
  return peak;
}

}  // namespace

ResponseCurve frequency_response_curve(const DpsModel& model, const TubeAssembly& tube,
                                       const SweepConfig& cfg) {
  model.validate();
  tube.validate();
  if (!(cfg.lo_hz > 0.0) || !(cfg.lo_hz < cfg.hi_hz))
    throw ValidationError("sweep needs 0 < lo < hi");
  if (!(cfg.step_hz > 0.0)) throw ValidationError("sweep step must be > 0");
  if (cfg.dwell_s < 3e-3 * (1.0 - 1e-9)) throw ValidationError("sweep dwell must be >= 3 ms");
  if (!(cfg.amplitude_pa > 0.0)) throw ValidationError("sweep amplitude must be > 0");
  if (!(model.damping_ratio > 0.0))
    throw ValidationError("frequency sweep needs damping_ratio > 0 to settle");

  const double f_h = resonant_hz(model, tube);
  const auto count = static_cast<std::size_t>(std::floor((cfg.hi_hz - cfg.lo_hz) / cfg.step_hz + 1e-9)) + 1;
  ResponseCurve curve;
  curve.frequency_hz.resize(count);
  curve.peak_pa.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = cfg.direction == SweepDirection::up ? k : count - 1 - k;
    const double f = cfg.lo_hz + static_cast<double>(i) * cfg.step_hz;
    curve.frequency_hz[i] = f;
    curve.peak_pa[i] = tone_peak(f, f_h, model.damping_ratio, cfg);
  }
  return curve;
}

ResonantBand detect_resonance(const ResponseCurve& curve, const SweepConfig& cfg) {
  const auto& peaks = curve.peak_pa;
  if (peaks.size() < 3) throw NoResonanceError("sweep has fewer than 3 tones");
  const auto it = std::max_element(peaks.begin(), peaks.end());
  const auto idx = static_cast<std::size_t>(it - peaks.begin());

  std::vector<double> sorted = peaks;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double prominence = median > 0.0 ? *it / median : 0.0;

  if (idx == 0 || idx + 1 == peaks.size())
    throw NoResonanceError("response peaks at the sweep edge (" +
                           std::to_string(curve.frequency_hz[idx]) + " Hz); no resonance in range");
  if (prominence < cfg.min_prominence)
    throw NoResonanceError("response curve is flat (prominence " + std::to_string(prominence) + ")");

  const double center = curve.frequency_hz[idx];
  return {{center - cfg.step_hz, center + cfg.step_hz}, center, *it, prominence};
}

ResonantBand frequency_sweep(const DpsModel& model, const TubeAssembly& tube,
                             const SweepConfig& cfg) {
  return detect_resonance(frequency_response_curve(model, tube, cfg), cfg);
}

}  // namespace nprsim

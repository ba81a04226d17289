#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nprsim/types.hpp"

namespace nprsim {

enum class Transducer { capacitive, piezoresistive, thermal_mass_flow };

const char* to_string(Transducer t);
Transducer transducer_from_string(const std::string& s);

namespace calib {
/// Moving mass shared by all archetypes; stiffness is solved from the band midpoint.
inline constexpr double kMovingMassKg = 2.0e-4;
/// f_h / f_r at the reference tube (1 m, 5/16"). Fixes the effective internal volume.
inline constexpr double kReferenceTubeRatio = 0.88;
inline constexpr double kReferenceTubeLengthM = 1.0;
inline constexpr double kReferenceTubeDiameterM = inches(5.0 / 16.0);
inline constexpr double kSoundSpeedMps = 343.0;
inline constexpr double kAudioRateHz = 48000.0;

/// Effective internal volume (m^3) that places f_h at kReferenceTubeRatio * f_r.
double effective_internal_volume();
}  // namespace calib

/// A differential pressure sensor archetype modelled as a damped second-order transducer.
struct DpsModel {
  std::string part_id;
  Transducer transducer = Transducer::piezoresistive;
  Interval pressure_range_pa;
  Interval base_resonant_hz;  // no-tube band
  double damping_ratio = 1.0;
  double diaphragm_stiffness = 0.0;  // S, N/m
  double moving_mass = 0.0;          // M, kg
  double internal_volume = 0.0;      // V, m^3
  double sample_rate_hz = calib::kAudioRateHz;
  /// False for archetypes whose resonance lies outside the characterization range.
  bool band_reported = true;

  /// Builds a model whose S, M and V are calibrated to `band` (midpoint).
  static DpsModel calibrated(std::string part_id, Transducer transducer, Interval pressure_range,
                             Interval band, double damping_ratio = 1.0,
                             double sample_rate_hz = calib::kAudioRateHz);

  DpsModel with_damping(double xi) const;

  /// Throws ValidationError when an invariant is broken.
  void validate() const;
};

struct TubeAssembly {
  double length_m = 0.0;  // 0 means no tube
  double inner_diameter_m = calib::kReferenceTubeDiameterM;
  bool pickup_device = false;
  double sound_speed_mps = calib::kSoundSpeedMps;

  double cross_section_m2() const;
  bool present() const { return length_m > 0.0; }
  void validate() const;
};

struct TransducerState {
  double p_out = 0.0;       // Pa
  double p_out_rate = 0.0;  // Pa/s
  double time = 0.0;        // s
};

double natural_resonant_hz(const DpsModel& model);

/// Resonance of the sensor behind a sampling tube. Throws ValidationError when the tube is absent.
double helmholtz_resonant_hz(const DpsModel& model, const TubeAssembly& tube);

/// natural_resonant_hz without a tube, helmholtz_resonant_hz otherwise.
double resonant_hz(const DpsModel& model, const TubeAssembly& tube);

/// Fixed-step RK4 integrator for p'' + 2 xi w p' + w^2 p = w^2 u.
class HelmholtzIntegrator {
 public:
  HelmholtzIntegrator(double omega, double damping_ratio);

  /// Advances one step of length dt with inlet samples at start, midpoint and end.
  void step(double u0, double u_mid, double u1, double dt);
  void reset(double p = 0.0, double rate = 0.0);

  double p() const { return p_; }
  double rate() const { return rate_; }
  double omega() const { return omega_; }

 private:
  double omega_;
  double xi_;
  double p_ = 0.0;
  double rate_ = 0.0;
};

/// Largest admissible step for a resonance at `f_h` (1 / (20 f_h)).
double max_stable_dt(double f_h);

/// Response of the sensor to a sampled inlet pressure, starting from rest.
/// One state per inlet sample; state[0] is the rest state at t = 0.
std::vector<TransducerState> step_response(const DpsModel& model, const TubeAssembly& tube,
                                           std::span<const double> inlet, double dt);

/// Same integration with an inlet evaluated exactly at each RK4 stage.
std::vector<TransducerState> step_response(const DpsModel& model, const TubeAssembly& tube,
                                           const std::function<double(double)>& inlet,
                                           std::size_t samples, double dt);

/// Critically damped release from (p0, v0).
double peak_decay(double p0, double v0, double omega_h, double t);

enum class SweepDirection { up, down };

struct SweepConfig {
  double lo_hz = 50.0;
  double hi_hz = 40000.0;
  double step_hz = 10.0;
  double dwell_s = 3e-3;
  double amplitude_pa = 1.0;
  SweepDirection direction = SweepDirection::up;
  /// Peak over median response below which the curve counts as flat.
  double min_prominence = 2.0;
};

struct ResponseCurve {
  std::vector<double> frequency_hz;
  std::vector<double> peak_pa;
};

struct ResonantBand {
  Interval band_hz;
  double center_hz = 0.0;
  double peak_pa = 0.0;
  double prominence = 0.0;
};

/// Per-tone peak output; tones are listed in ascending frequency whatever the sweep direction.
ResponseCurve frequency_response_curve(const DpsModel& model, const TubeAssembly& tube,
                                       const SweepConfig& cfg);

/// Detected resonant band (argmax +- one step). Throws NoResonanceError when the curve is flat
/// or peaks at a sweep endpoint.
ResonantBand detect_resonance(const ResponseCurve& curve, const SweepConfig& cfg);

ResonantBand frequency_sweep(const DpsModel& model, const TubeAssembly& tube,
                             const SweepConfig& cfg = {});

}  // namespace nprsim

#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "nprsim/audio.hpp"
#include "nprsim/sensor.hpp"

namespace nprsim {

namespace calib {
/// Tube loss at the reference diameter (5/16"), dB per metre.
inline constexpr double kTubeLossDbPerM = 9.229558;
/// Foam-gasket pickup device loss, dB.
inline constexpr double kPickupLossDb = 6.0;
/// Acoustic-to-reading coupling gain of the resonant transducer.
inline constexpr double kCouplingGain = 3322.603;
/// SPL reference distance used by the phone-source experiments (1 inch).
inline constexpr double kPhoneRefDistanceM = 0.0254;
}  // namespace calib

/// RMS pressure (Pa) of a sound pressure level re 20 uPa.
double spl_to_pressure_amp(double spl_db);
double pressure_amp_to_spl(double rms_pa);

struct ToneWave {
  double frequency_hz = 0.0;
  double scale = 1.0;  // fraction of full scale
};

struct SampledWave {
  std::shared_ptr<const AudioBuffer> audio;
  /// Frequency used for frequency-dependent losses (the resonant tone it carries).
  double nominal_frequency_hz = 0.0;
};

/// An audio source near a pressure port. `spl_db` is the level of a full-scale signal
/// measured at `ref_distance_m`.
struct AcousticSource {
  double spl_db = 65.0;
  double ref_distance_m = calib::kPhoneRefDistanceM;
  double position_distance_m = calib::kPhoneRefDistanceM;
  double phase_rad = 0.0;
  std::variant<ToneWave, SampledWave> waveform = ToneWave{};

  /// Peak pressure A_0 (Pa) of a full-scale signal at the reference distance.
  double full_scale_amplitude_pa() const;
  double frequency_hz() const;
  void validate() const;
};

/// Per-metre sound loss inside a sampling tube.
struct TubeLossModel {
  double ref_db_per_m = calib::kTubeLossDbPerM;
  double ref_diameter_m = calib::kReferenceTubeDiameterM;
  double ref_frequency_hz = 1000.0;
  double frequency_exponent = 0.0;

  double db_per_m(double frequency_hz, double inner_diameter_m) const;
};

struct PathModel {
  TubeAssembly tube;
  double pickup_loss_db = calib::kPickupLossDb;  // applied when tube.pickup_device
  double extra_loss_db = 0.0;                     // enclosure foam and similar
  TubeLossModel loss;
  double coupling_gain = calib::kCouplingGain;
  /// Clamp on |P_s| at the port; 0 disables it.
  double saturation_pa = 0.0;

  double effective_pickup_loss_db() const { return tube.pickup_device ? pickup_loss_db : 0.0; }
  double total_loss_db(double frequency_hz) const;
  void validate() const;
};

struct Propagation {
  double h = 1.0;          // attenuation factor h(d, f)
  double delay_s = 0.0;    // d / v
  double phase_rad = 0.0;  // total phase term of the tone argument
};

Propagation propagate(const AcousticSource& source, const PathModel& path);
Propagation propagate(const AcousticSource& source, const PathModel& path, double frequency_hz);

struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0 / calib::kAudioRateHz;
  std::size_t samples = 0;
};

/// Sound pressure P_s(t) arriving at the sensor side of the port.
std::vector<double> port_pressure(const AcousticSource& source, const PathModel& path,
                                  const TimeGrid& grid);

}  // namespace nprsim

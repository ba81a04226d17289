#include "nprsim/acoustics.hpp"

#include <algorithm>
#include <cmath>

#include "nprsim/errors.hpp"

namespace nprsim {

double spl_to_pressure_amp(double spl_db) { return 20e-6 * std::pow(10.0, spl_db / 20.0); }

double pressure_amp_to_spl(double rms_pa) { return 20.0 * std::log10(rms_pa / 20e-6); }

double AcousticSource::full_scale_amplitude_pa() const {
  return std::numbers::sqrt2 * spl_to_pressure_amp(spl_db);
}

double AcousticSource::frequency_hz() const {
  if (const auto* tone = std::get_if<ToneWave>(&waveform)) return tone->frequency_hz;
  return std::get<SampledWave>(waveform).nominal_frequency_hz;
}

void AcousticSource::validate() const {
  if (!(spl_db >= 0.0 && spl_db <= 140.0)) throw ValidationError("spl_db must lie in [0, 140]");
  if (!(ref_distance_m > 0.0)) throw ValidationError("ref_distance_m must be > 0");
  if (!(position_distance_m > 0.0)) throw ValidationError("position_distance_m must be > 0");
  if (const auto* s = std::get_if<SampledWave>(&waveform); s != nullptr && !s->audio)
    throw ValidationError("sampled source has no audio");
}

double TubeLossModel::db_per_m(double frequency_hz, double inner_diameter_m) const {
  double loss = ref_db_per_m * (ref_diameter_m / inner_diameter_m);
  if (frequency_exponent != 0.0 && frequency_hz > 0.0)
    loss *= std::pow(frequency_hz / ref_frequency_hz, frequency_exponent);
  return loss;
}

double PathModel::total_loss_db(double frequency_hz) const {
  return loss.db_per_m(frequency_hz, tube.inner_diameter_m) * tube.length_m +
         effective_pickup_loss_db() + extra_loss_db;
}

void PathModel::validate() const {
  tube.validate();
  if (!(pickup_loss_db >= 0.0)) throw ValidationError("pickup_loss_db must be >= 0");
  if (!(extra_loss_db >= 0.0)) throw ValidationError("extra_loss_db must be >= 0");
  if (!(loss.ref_db_per_m >= 0.0)) throw ValidationError("tube loss must be >= 0");
  if (!(coupling_gain > 0.0)) throw ValidationError("coupling_gain must be > 0");
  if (!(saturation_pa >= 0.0)) throw ValidationError("saturation_pa must be >= 0");
}

Propagation propagate(const AcousticSource& source, const PathModel& path, double frequency_hz) {
  source.validate();
  path.validate();
  Propagation p;
  p.h = (source.ref_distance_m / source.position_distance_m) *
        std::pow(10.0, -path.total_loss_db(frequency_hz) / 20.0);
  p.delay_s = source.position_distance_m / path.tube.sound_speed_mps;
  p.phase_rad = p.delay_s + source.phase_rad;
  return p;
}

Propagation propagate(const AcousticSource& source, const PathModel& path) {
  return propagate(source, path, source.frequency_hz());
}

std::vector<double> port_pressure(const AcousticSource& source, const PathModel& path,
                                  const TimeGrid& grid) {
  const Propagation prop = propagate(source, path);
  const double amp = path.coupling_gain * prop.h * source.full_scale_amplitude_pa();
  std::vector<double> out(grid.samples, 0.0);

  if (const auto* tone = std::get_if<ToneWave>(&source.waveform)) {
    const double w = kTwoPi * tone->frequency_hz;
    for (std::size_t i = 0; i < grid.samples; ++i) {
      const double t = grid.t0 + static_cast<double>(i) * grid.dt;
      out[i] = amp * tone->scale * std::cos(w * t + prop.phase_rad);
    }
  } else {
    const auto& wave = std::get<SampledWave>(source.waveform);
    const double fs = wave.audio->sample_rate_hz;
    if (std::abs(grid.dt * fs - 1.0) > 1e-9)
      throw SampleRateMismatchError("time grid step does not match the " +
                                    std::to_string(wave.audio->sample_rate_hz) +
                                    " Hz waveform");
    const auto delay = static_cast<long>(std::lround(prop.delay_s * fs));
    const auto first = static_cast<long>(std::lround(grid.t0 * fs));
    const auto& s = wave.audio->samples;
    for (std::size_t i = 0; i < grid.samples; ++i) {
      const long k = first + static_cast<long>(i) - delay;
      if (k >= 0 && k < static_cast<long>(s.size())) out[i] = amp * s[static_cast<std::size_t>(k)];
    }
  }

  if (path.saturation_pa > 0.0)
    for (double& v : out) v = std::clamp(v, -path.saturation_pa, path.saturation_pa);
  return out;
}

}  // namespace nprsim

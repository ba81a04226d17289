#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nprsim/acoustics.hpp"
#include "nprsim/audio.hpp"
#include "nprsim/sensor.hpp"

namespace nprsim {

/// Plan for inserting resonant bursts into a carrier track.
struct SegmentSchedule {
  Interval band_hz;
  double duration_s = 2e-3;   // T_D
  double interval_s = 15e-3;  // T_I
  /// Cycles per burst, cycled over consecutive bursts. Empty: every burst lasts duration_s.
  std::vector<int> cycles_per_segment;
  /// Burst amplitude as a fraction of the carrier peak (of full scale for a silent carrier).
  double amplitude_scale = 0.9;
  double fade_in_s = 0.25e-3;
  double start_s = 0.0;  // start of the first burst

  /// Throws ScheduleError when the schedule cannot carry `target_hz`.
  void validate(double target_hz) const;
  /// Length in seconds of burst k at `target_hz`.
  double burst_length_s(std::size_t k, double target_hz) const;
};

/// Sample range [first, last] of one inserted burst; `last` is the peak sample.
struct BurstSpan {
  std::size_t first = 0;
  std::size_t last = 0;
};

struct AttackAudio {
  AudioBuffer audio;
  std::vector<BurstSpan> bursts;
  std::vector<double> inserted;  // burst component alone, same length as audio
  double burst_amplitude = 0.0;
};

/// Removes `band_hz` from the carrier (stereo carriers must already be downmixed).
AudioBuffer suppress_band(const AudioBuffer& carrier, Interval band_hz);

AttackAudio synthesize_attack_detailed(const AudioBuffer& carrier, const SegmentSchedule& schedule,
                                       double target_hz);
AudioBuffer synthesize_attack(const AudioBuffer& carrier, const SegmentSchedule& schedule,
                              double target_hz);

std::vector<bool> burst_mask(const std::vector<BurstSpan>& bursts, std::size_t samples);
/// Mask with `on_s` true out of every `period_s`, starting at sample 0.
std::vector<bool> uniform_mask(std::size_t samples, int sample_rate_hz, double period_s,
                               double on_s);

/// Ratio of band power density inside masked segments to the density outside them.
inline constexpr double kPsdRatioCap = 1e6;
double psd_ratio(const AudioBuffer& audio, Interval band_hz,
                 const std::optional<std::vector<bool>>& segment_mask = std::nullopt);

/// True when the last sample of every burst is the largest sample of its final cycle.
bool bursts_end_at_peak(const AttackAudio& attack, double target_hz);

/// Deterministic music-like carrier (chords, percussion, noise bed) with peak 0.5.
AudioBuffer calibration_carrier(double seconds, int sample_rate_hz = 48000,
                                std::uint64_t seed = 7);

AudioBuffer silent_carrier(double seconds, int sample_rate_hz = 48000);

struct ForgedOptions {
  /// Tone frequency the attacker inserts; defaults to the schedule band midpoint.
  std::optional<double> target_hz;
  std::optional<AudioBuffer> carrier;  // silent when absent
  double settle_s = 0.25;
  double window_s = 2.0;
  /// First-order low-pass applied to the sensor output before averaging (0 = none).
  double post_lpf_hz = 0.0;
};

struct ForgedTrace {
  double dt = 0.0;
  std::vector<double> inlet;  // port pressure fed to the sensor
  std::vector<double> output;  // sensor output p_o
  std::vector<double> output_rate;
  std::vector<std::size_t> burst_end;  // sensor sample index of each burst's final peak
  std::size_t window_begin = 0;
  double forged_pa = 0.0;  // mean |output| over the steady window
};

ForgedTrace forged_pressure_trace(const SegmentSchedule& schedule, const DpsModel& model,
                                  const PathModel& path, const AcousticSource& source,
                                  const ForgedOptions& opts = {});

double forged_pressure_estimate(const SegmentSchedule& schedule, const DpsModel& model,
                                const PathModel& path, const AcousticSource& source,
                                const ForgedOptions& opts = {});

double forged_pressure_estimate(const SegmentSchedule& schedule, const DpsModel& model,
                                const TubeAssembly& tube, const AcousticSource& source);

/// Schedule retuned to a resonance: band = f +- 5 Hz, T_D at least one period.
SegmentSchedule retuned_schedule(const SegmentSchedule& base, double resonant_hz);

}  // namespace nprsim

#include "nprsim/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "nprsim/errors.hpp"
#include "nprsim/spectral.hpp"

namespace nprsim {
namespace {

constexpr double kCycleTolerance = 1e-3;  // relative slack on "c cycles fit in T_D"

std::size_t samples_for(double seconds, double fs) {
  return static_cast<std::size_t>(std::llround(seconds * fs));
}

}  // namespace

void SegmentSchedule::validate(double target_hz) const {
  if (!(band_hz.lo > 0.0) || band_hz.hi < band_hz.lo) throw ScheduleError("invalid band");
  if (!band_hz.contains(target_hz))
    throw ScheduleError("target frequency " + std::to_string(target_hz) +
                        " Hz lies outside the schedule band");
  if (!(duration_s * band_hz.hi >= 1.0 - kCycleTolerance))
    throw ScheduleError("T_D " + std::to_string(duration_s * 1e3) +
                        " ms is shorter than one period of the band");
  if (!(interval_s > duration_s)) throw ScheduleError("T_I must exceed T_D");
  for (int c : cycles_per_segment) {
    if (c <= 0) throw ScheduleError("cycles per segment must be positive");
    if (c / target_hz > duration_s * (1.0 + kCycleTolerance))
      throw ScheduleError(std::to_string(c) + " cycles do not fit in T_D");
  }
  if (!(amplitude_scale > 0.0 && std::isfinite(amplitude_scale)))
    throw ScheduleError("amplitude_scale must be > 0");
  if (!(fade_in_s >= 0.0)) throw ScheduleError("fade_in must be >= 0");
  if (!(start_s >= 0.0)) throw ScheduleError("start must be >= 0");
}

double SegmentSchedule::burst_length_s(std::size_t k, double target_hz) const {
  if (cycles_per_segment.empty()) return duration_s;
  return cycles_per_segment[k % cycles_per_segment.size()] / target_hz;
}

AudioBuffer suppress_band(const AudioBuffer& carrier, Interval band_hz) {
  carrier.validate();
  AudioBuffer out;
  out.sample_rate_hz = carrier.sample_rate_hz;
  out.samples = spectral::band_stop(carrier.samples, carrier.sample_rate_hz, band_hz);
  for (double& s : out.samples) s = std::clamp(s, -1.0, 1.0);
  return out;
}

AttackAudio synthesize_attack_detailed(const AudioBuffer& carrier, const SegmentSchedule& schedule,
                                       double target_hz) {
  carrier.validate();
  schedule.validate(target_hz);
  const double fs = carrier.sample_rate_hz;
  if (schedule.band_hz.hi >= fs / 2.0) throw NyquistError("band exceeds Nyquist");
  if (!(carrier.duration_s() > schedule.interval_s))
    throw ScheduleError("carrier is shorter than one interval");

  const double carrier_peak = carrier.peak();
  AttackAudio result;
  result.audio = carrier_peak > 0.0 ? suppress_band(carrier, schedule.band_hz) : carrier;
  result.burst_amplitude = schedule.amplitude_scale * (carrier_peak > 0.0 ? carrier_peak : 1.0);

  auto& y = result.audio.samples;
  const std::size_t n = y.size();
  result.inserted.assign(n, 0.0);
  const double a = result.burst_amplitude;
  const double w = kTwoPi * target_hz / fs;
  for (std::size_t k = 0;; ++k) {
    const std::size_t len =
        std::max<std::size_t>(1, samples_for(schedule.burst_length_s(k, target_hz), fs));
    const std::size_t first = samples_for(schedule.start_s + k * schedule.interval_s, fs);
    const std::size_t last = first + len - 1;
    if (last >= n) break;
    const std::size_t fade =
        std::min(samples_for(schedule.fade_in_s, fs), len / 4);
    for (std::size_t i = first; i <= last; ++i) {
      double v = a * std::cos(w * (static_cast<double>(i) - static_cast<double>(last)));
      const std::size_t j = i - first;
      if (j < fade) v *= 0.5 - 0.5 * std::cos(std::numbers::pi * j / fade);
      y[i] += v;
      result.inserted[i] = v;
    }
    result.bursts.push_back({first, last});
  }
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(y[i]) > 1.0)
      throw ClippingError("sample " + std::to_string(i) + " exceeds full scale (" +
                          std::to_string(y[i]) + "); lower amplitude_scale");
  return result;
}

AudioBuffer synthesize_attack(const AudioBuffer& carrier, const SegmentSchedule& schedule,
                              double target_hz) {
  return synthesize_attack_detailed(carrier, schedule, target_hz).audio;
}

std::vector<bool> burst_mask(const std::vector<BurstSpan>& bursts, std::size_t samples) {
  std::vector<bool> m(samples, false);
  for (const auto& b : bursts)
    for (std::size_t i = b.first; i <= b.last && i < samples; ++i) m[i] = true;
  return m;
}

std::vector<bool> uniform_mask(std::size_t samples, int sample_rate_hz, double period_s,
                               double on_s) {
  const std::size_t period = std::max<std::size_t>(1, samples_for(period_s, sample_rate_hz));
  const std::size_t on = samples_for(on_s, sample_rate_hz);
  std::vector<bool> m(samples, false);
  for (std::size_t i = 0; i < samples; ++i) m[i] = (i % period) < on;
  return m;
}

double psd_ratio(const AudioBuffer& audio, Interval band_hz,
                 const std::optional<std::vector<bool>>& segment_mask) {
  if (audio.samples.empty()) throw ValidationError("audio is empty");
  const auto& x = audio.samples;
  const double fs = audio.sample_rate_hz;
  const std::vector<bool> mask =
      segment_mask ? *segment_mask : uniform_mask(x.size(), audio.sample_rate_hz, 15e-3, 2e-3);
  if (mask.size() != x.size()) throw ValidationError("mask length differs from audio length");

  struct Run {
    std::size_t begin, len;
  };
  std::vector<Run> inside, outside;
  for (std::size_t i = 0; i < mask.size();) {
    std::size_t j = i;
    while (j < mask.size() && mask[j] == mask[i]) ++j;
    (mask[i] ? inside : outside).push_back({i, j - i});
    i = j;
  }
  std::erase_if(inside, [](const Run& r) { return r.len < 2; });
  if (inside.empty()) throw EmptyMaskError("segment mask selects no samples");

  std::vector<std::size_t> lens;
  for (const auto& r : inside) lens.push_back(r.len);
  std::nth_element(lens.begin(), lens.begin() + lens.size() / 2, lens.end());
  const std::size_t win = lens[lens.size() / 2];

  auto density = [&](std::size_t begin, std::size_t len) {
    const std::span<const double> seg(x.data() + begin, len);
    return spectral::band_density(spectral::periodogram(seg, fs), len, fs, band_hz);
  };
  double in_sum = 0.0;
  for (const auto& r : inside) in_sum += density(r.begin, r.len);
  double out_sum = 0.0;
  std::size_t out_count = 0;
  for (const auto& r : outside)
    for (std::size_t k = 0; (k + 1) * win <= r.len; ++k) {
      out_sum += density(r.begin + k * win, win);
      ++out_count;
    }
  if (out_count == 0) throw EmptyMaskError("no unmasked window of segment length");

  const double in_mean = in_sum / static_cast<double>(inside.size());
  const double out_mean = out_sum / static_cast<double>(out_count);
  if (out_mean <= 0.0 || in_mean >= kPsdRatioCap * out_mean) return kPsdRatioCap;
  return in_mean / out_mean;
}

bool bursts_end_at_peak(const AttackAudio& attack, double target_hz) {
  const double q = 1.0 / 32767.0;
  const auto period = static_cast<std::size_t>(
      std::ceil(attack.audio.sample_rate_hz / target_hz));
  const auto& x = attack.inserted;
  for (const auto& b : attack.bursts) {
    if (b.last >= x.size() || !(x[b.last] > 0.0)) return false;
    const std::size_t from = b.last + 1 > period ? std::max(b.first, b.last + 1 - period) : b.first;
    const double mx = *std::max_element(x.begin() + static_cast<std::ptrdiff_t>(from),
                                        x.begin() + static_cast<std::ptrdiff_t>(b.last) + 1);
    if (mx - x[b.last] > q) return false;
  }
  return true;
}

AudioBuffer silent_carrier(double seconds, int sample_rate_hz) {
  AudioBuffer b;
  b.sample_rate_hz = sample_rate_hz;
  b.samples.assign(samples_for(seconds, sample_rate_hz), 0.0);
  return b;
}

AudioBuffer calibration_carrier(double seconds, int sample_rate_hz, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AudioBuffer b = silent_carrier(seconds, sample_rate_hz);
  const double fs = sample_rate_hz;
  const std::size_t n = b.samples.size();

  // I-V-vi-IV in A major, two beats per chord at 120 bpm
  const double roots[] = {220.0, 329.63, 369.99, 293.66};
  const double third[] = {1.25992, 1.25992, 1.18921, 1.25992};
  const double bar = 1.0;
  const double beat = 0.5;
  double hat_env = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const auto chord = static_cast<std::size_t>(t / bar) % 4;
    const double r = roots[chord];
    const double tb = std::fmod(t, beat);
    const double env = 0.6 + 0.4 * std::exp(-tb * 6.0);
    double s = 0.0;
    for (double mult : {1.0, third[chord], 1.49831, 2.0}) {
      const double f = r * mult;
      s += 0.18 * (std::sin(kTwoPi * f * t) + 0.35 * std::sin(kTwoPi * 2 * f * t) +
                   0.15 * std::sin(kTwoPi * 3 * f * t));
    }
    s *= env;
    s += 0.35 * std::sin(kTwoPi * (r / 2.0) * t) * std::exp(-tb * 3.0);  // bass
    // kick on each beat, noisy hat on the off-beat
    s += 0.6 * std::sin(kTwoPi * (50.0 + 60.0 * std::exp(-tb * 30.0)) * tb) * std::exp(-tb * 18.0);
    const double off = std::fmod(t + beat / 2.0, beat);
    hat_env = std::exp(-off * 60.0);
    s += 0.08 * hat_env * gauss(rng);
    s += 0.02 * gauss(rng);
    b.samples[i] = s;
  }
  const double pk = b.peak();
  if (pk > 0.0)
    for (double& s : b.samples) s *= 0.5 / pk;
  return b;
}

SegmentSchedule retuned_schedule(const SegmentSchedule& base, double resonant_hz) {
  SegmentSchedule s = base;
  s.band_hz = {resonant_hz - 5.0, resonant_hz + 5.0};
  s.duration_s = std::max(base.duration_s, 1.0 / resonant_hz);
  if (s.interval_s <= s.duration_s) s.interval_s = 2.0 * s.duration_s;
  return s;
}

ForgedTrace forged_pressure_trace(const SegmentSchedule& schedule, const DpsModel& model,
                                  const PathModel& path, const AcousticSource& source,
                                  const ForgedOptions& opts) {
  model.validate();
  path.validate();
  const double target = opts.target_hz.value_or(schedule.band_hz.mid());
  if (!(opts.window_s >= 2.0)) throw ValidationError("averaging window must be >= 2 s");
  if (!(opts.settle_s >= 0.0)) throw ValidationError("settle time must be >= 0");
  const double duration = opts.settle_s + opts.window_s;

  AudioBuffer carrier;
  if (opts.carrier) {
    carrier = *opts.carrier;
    if (carrier.duration_s() + 1e-9 < duration)
      throw ValidationError("carrier shorter than settle + window");
  } else {
    carrier = silent_carrier(duration, static_cast<int>(model.sample_rate_hz));
  }
  auto attack = std::make_shared<AttackAudio>(synthesize_attack_detailed(carrier, schedule, target));
  const double fs = attack->audio.sample_rate_hz;

  AcousticSource src = source;
  src.waveform = SampledWave{std::shared_ptr<const AudioBuffer>(attack, &attack->audio), target};
  const auto audio_rate_inlet =
      port_pressure(src, path, TimeGrid{0.0, 1.0 / fs, attack->audio.samples.size()});

  const double f_h = resonant_hz(model, path.tube);
  const auto m = static_cast<std::size_t>(
      std::max(1.0, std::ceil((1.0 / fs) / max_stable_dt(f_h) - 1e-9)));
  ForgedTrace tr;
  tr.dt = 1.0 / (fs * static_cast<double>(m));
  if (m == 1) {
    tr.inlet = audio_rate_inlet;
  } else {
    const std::size_t n = audio_rate_inlet.size();
    tr.inlet.resize((n - 1) * m + 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double u = static_cast<double>(j) / static_cast<double>(m);
        tr.inlet[i * m + j] = (1.0 - u) * audio_rate_inlet[i] + u * audio_rate_inlet[i + 1];
      }
    tr.inlet.back() = audio_rate_inlet.back();
  }

  const auto delay = static_cast<std::size_t>(std::llround(
      source.position_distance_m / path.tube.sound_speed_mps * fs));
  for (const auto& b : attack->bursts)
    if ((b.last + delay) * m < tr.inlet.size()) tr.burst_end.push_back((b.last + delay) * m);

  const auto states = step_response(model, path.tube, tr.inlet, tr.dt);
  tr.output.resize(states.size());
  tr.output_rate.resize(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    tr.output[i] = states[i].p_out;
    tr.output_rate[i] = states[i].p_out_rate;
  }
  const std::vector<double> measured =
      opts.post_lpf_hz > 0.0 ? spectral::lowpass_first_order(tr.output, opts.post_lpf_hz, tr.dt)
                             : tr.output;

  tr.window_begin = std::min(measured.size(), samples_for(opts.settle_s, 1.0 / tr.dt));
  double sum = 0.0;
  for (std::size_t i = tr.window_begin; i < measured.size(); ++i) sum += std::abs(measured[i]);
  const std::size_t cnt = measured.size() - tr.window_begin;
  tr.forged_pa = cnt > 0 ? sum / static_cast<double>(cnt) : 0.0;
  return tr;
}

double forged_pressure_estimate(const SegmentSchedule& schedule, const DpsModel& model,
                                const PathModel& path, const AcousticSource& source,
                                const ForgedOptions& opts) {
  return forged_pressure_trace(schedule, model, path, source, opts).forged_pa;
}

double forged_pressure_estimate(const SegmentSchedule& schedule, const DpsModel& model,
                                const TubeAssembly& tube, const AcousticSource& source) {
  PathModel path;
  path.tube = tube;
  return forged_pressure_estimate(schedule, model, path, source);
}

}  // namespace nprsim

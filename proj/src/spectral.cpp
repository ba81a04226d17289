#include "nprsim/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "nprsim/errors.hpp"

namespace nprsim::spectral {
namespace {

// FFTW planning is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<double> hann(std::size_t n, bool periodic) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double denom = periodic ? static_cast<double>(n) : static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / denom);
  return w;
}

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw ValidationError("FFT length must be >= 2");
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  auto* spec = fftw_alloc_complex(n / 2 + 1);
  spec_ = spec;
  fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::forward(std::span<const double> in, std::vector<std::complex<double>>& out) {
  const std::size_t m = std::min(in.size(), n_);
  std::copy_n(in.begin(), m, real_);
  std::fill(real_ + m, real_ + n_, 0.0);
  fftw_execute(static_cast<fftw_plan>(fwd_));
  auto* spec = static_cast<fftw_complex*>(spec_);
  out.resize(bins());
  for (std::size_t k = 0; k < bins(); ++k) out[k] = {spec[k][0], spec[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::vector<double>& out) {
  auto* spec = static_cast<fftw_complex*>(spec_);
  for (std::size_t k = 0; k < bins(); ++k) {
    const auto v = k < in.size() ? in[k] : std::complex<double>{};
    spec[k][0] = v.real();
    spec[k][1] = v.imag();
  }
  fftw_execute(static_cast<fftw_plan>(inv_));
  out.resize(n_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
}

std::vector<double> periodogram(std::span<const double> x, double sample_rate_hz) {
  const std::size_t n = x.size();
  if (n < 2) throw ValidationError("periodogram needs at least 2 samples");
  const auto w = hann(n, false);
  double wss = 0.0;
  std::vector<double> xw(n);
  for (std::size_t i = 0; i < n; ++i) {
    xw[i] = x[i] * w[i];
    wss += w[i] * w[i];
  }
  RealFft fft(n);
  std::vector<std::complex<double>> spec;
  fft.forward(xw, spec);
  std::vector<double> psd(spec.size());
  const double norm = 1.0 / (sample_rate_hz * wss);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    double p = std::norm(spec[k]) * norm;
    if (k != 0 && !(n % 2 == 0 && k == spec.size() - 1)) p *= 2.0;
    psd[k] = p;
  }
  return psd;
}

double band_density(std::span<const double> psd, std::size_t frame_len, double sample_rate_hz,
                    Interval band) {
  const double df = sample_rate_hz / static_cast<double>(frame_len);
  auto lo = static_cast<std::size_t>(std::max(0.0, std::ceil(band.lo / df)));
  auto hi = static_cast<std::size_t>(std::max(0.0, std::floor(band.hi / df)));
  hi = std::min(hi, psd.size() - 1);
  if (lo > hi) {
    lo = hi = std::min(static_cast<std::size_t>(std::lround(band.mid() / df)), psd.size() - 1);
  }
  double sum = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) sum += psd[k];
  return sum / static_cast<double>(hi - lo + 1);
}

std::vector<double> band_stop(std::span<const double> x, double sample_rate_hz, Interval band,
                              const BandStopConfig& cfg) {
  if (band.hi >= sample_rate_hz / 2.0)
    throw NyquistError("band upper edge " + std::to_string(band.hi) + " Hz exceeds Nyquist");
  if (band.lo > band.hi || band.lo < 0.0) throw ValidationError("invalid band");
  const std::size_t n = cfg.frame;
  const std::size_t hop = cfg.hop;
  const std::size_t total = x.size();
  if (total == 0) return {};

  const double df = sample_rate_hz / static_cast<double>(n);
  const std::size_t nbins = n / 2 + 1;
  std::vector<double> gain(nbins, 1.0);
  const double lo = band.lo - cfg.guard_bins * df;
  const double hi = band.hi + cfg.guard_bins * df;
  for (std::size_t k = 0; k < nbins; ++k) {
    const double f = static_cast<double>(k) * df;
    double dist = 0.0;  // distance outside the stop region, in bins
    if (f < lo) dist = (lo - f) / df;
    else if (f > hi) dist = (f - hi) / df;
    if (dist <= 0.0) gain[k] = 0.0;
    else if (dist < cfg.edge_bins + 1)
      gain[k] = 0.5 - 0.5 * std::cos(std::numbers::pi * dist / (cfg.edge_bins + 1));
  }

  // pad by one frame on each side so every input sample sees full overlap
  const std::size_t padded = total + 2 * n;
  const std::size_t frames = (padded - n) / hop + 1;
  std::vector<double> in(padded, 0.0), acc(padded + n, 0.0), norm(padded + n, 0.0);
  std::copy(x.begin(), x.end(), in.begin() + static_cast<std::ptrdiff_t>(n));
  const auto w = hann(n, true);

  RealFft fft(n);
  std::vector<double> frame(n), out;
  std::vector<std::complex<double>> spec;
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t off = f * hop;
    for (std::size_t i = 0; i < n; ++i) frame[i] = in[off + i] * w[i];
    fft.forward(frame, spec);
    for (std::size_t k = 0; k < nbins; ++k) spec[k] *= gain[k];
    fft.inverse(spec, out);
    for (std::size_t i = 0; i < n; ++i) {
      acc[off + i] += out[i] * w[i];
      norm[off + i] += w[i] * w[i];
    }
  }
  std::vector<double> y(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double d = norm[n + i];
    y[i] = d > 1e-12 ? acc[n + i] / d : 0.0;
  }
  return y;
}

std::vector<double> lowpass_first_order(std::span<const double> x, double cutoff_hz, double dt) {
  if (!(cutoff_hz > 0.0)) throw ValidationError("cutoff must be > 0");
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  if (cutoff_hz >= 0.5 / dt)
    throw NyquistError("cutoff " + std::to_string(cutoff_hz) + " Hz is not below Nyquist");
  // H(s) = wc / (s + wc) with wc prewarped so the digital -3 dB point lands on cutoff
  const double k = std::tan(std::numbers::pi * cutoff_hz * dt);
  const double b = k / (1.0 + k);
  const double a = (1.0 - k) / (1.0 + k);
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  double xp = x[0], yp = x[0];  // start at the DC steady state of the first sample
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double yi = b * (x[i] + xp) + a * yp;
    y[i] = yi;
    xp = x[i];
    yp = yi;
  }
  return y;
}

}  // namespace nprsim::spectral

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "nprsim/types.hpp"

namespace nprsim::spectral {

std::vector<double> hann(std::size_t n, bool periodic = true);

/// Real-input FFT of fixed length backed by FFTW. Not copyable.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// `in` shorter than size() is zero padded.
  void forward(std::span<const double> in, std::vector<std::complex<double>>& out);
  /// Inverse transform, normalized so inverse(forward(x)) == x.
  void inverse(std::span<const std::complex<double>> in, std::vector<double>& out);

 private:
  std::size_t n_;
  double* real_;
  void* spec_;
  void* fwd_;
  void* inv_;
};

/// One-sided power spectral density of a Hann-windowed frame (Pa^2/Hz or FS^2/Hz).
std::vector<double> periodogram(std::span<const double> x, double sample_rate_hz);

/// Mean density over the bins that fall in `band`; at least the nearest bin is used.
double band_density(std::span<const double> psd, std::size_t frame_len, double sample_rate_hz,
                    Interval band);

struct BandStopConfig {
  std::size_t frame = 4096;
  std::size_t hop = 1024;
  int guard_bins = 3;
  int edge_bins = 4;
};

/// STFT band-stop: zeroes `band` (plus guard bins) with raised-cosine skirts.
std::vector<double> band_stop(std::span<const double> x, double sample_rate_hz, Interval band,
                              const BandStopConfig& cfg = {});

/// First-order low-pass (bilinear with prewarping). Unit DC gain, -3 dB at cutoff.
std::vector<double> lowpass_first_order(std::span<const double> x, double cutoff_hz, double dt);

}  // namespace nprsim::spectral

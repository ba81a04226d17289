#include "nprsim/spectral.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nprsim/errors.hpp"

namespace nprsim::spectral {
namespace {

double rms(const std::vector<double>& x, std::size_t from = 0, std::size_t to = 0) {
  if (to == 0) to = x.size();
  double s = 0;
  for (std::size_t i = from; i < to; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

std::vector<double> tone(double f, double fs, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 * std::sin(kTwoPi * f * i / fs + 0.3);
  return x;
}

TEST(RealFft, RoundTrip) {
  RealFft fft(64);
  std::vector<double> x(64), y;
  for (int i = 0; i < 64; ++i) x[i] = std::cos(0.3 * i) + 0.1 * i;
  std::vector<std::complex<double>> spec;
  fft.forward(x, spec);
  fft.inverse(spec, y);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(x[i], y[i], 1e-12);
}

TEST(Periodogram, ToneConcentratesAtItsBin) {
  const double fs = 48000;
  const auto x = tone(3000.0, fs, 4800);
  const auto psd = periodogram(x, fs);
  EXPECT_GT(band_density(psd, x.size(), fs, {2990, 3010}), 1e4 * band_density(psd, x.size(), fs, {9000, 9010}));
}

TEST(BandStop, ToneInsideBandRemoved) {
  const double fs = 48000;
  const auto x = tone(685.0, fs, 48000);
  const auto y = band_stop(x, fs, {680, 690});
  EXPECT_LE(rms(y), 0.03 * rms(x));
}

TEST(BandStop, ToneOctaveBelowPasses) {
  const double fs = 48000;
  const auto x = tone(342.5, fs, 48000);
  const auto y = band_stop(x, fs, {680, 690});
  EXPECT_NEAR(rms(y) / rms(x), 1.0, 0.11);
}

TEST(BandStop, WhiteNoiseBandDropsThirtyDb) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 0.1);
  const double fs = 48000;
  std::vector<double> x(96000);
  for (double& v : x) v = g(rng);
  const auto y = band_stop(x, fs, {1000, 1200});
  const auto px = periodogram(x, fs), py = periodogram(y, fs);
  const double in_drop = band_density(py, y.size(), fs, {1000, 1200}) / band_density(px, x.size(), fs, {1000, 1200});
  EXPECT_LT(10.0 * std::log10(in_drop), -30.0);
  const double out_change = band_density(py, y.size(), fs, {3000, 8000}) / band_density(px, x.size(), fs, {3000, 8000});
  EXPECT_LT(std::abs(10.0 * std::log10(out_change)), 1.0);
}

TEST(BandStop, RejectsBandAboveNyquist) {
  std::vector<double> x(100, 0.0);
  EXPECT_THROW(band_stop(x, 48000, {23000, 25000}), NyquistError);
}

TEST(Lowpass, DcUnchangedAndMinusThreeDbAtCutoff) {
  const double dt = 1.0 / 48000;
  std::vector<double> dc(1000, 1.7);
  for (double v : lowpass_first_order(dc, 120.0, dt)) EXPECT_NEAR(v, 1.7, 1e-12);
  const auto x = tone(120.0, 48000, 96000);
  const auto y = lowpass_first_order(x, 120.0, dt);
  EXPECT_NEAR(rms(y, 48000) / rms(x, 48000), 1.0 / std::sqrt(2.0), 0.05 / std::sqrt(2.0));
}

TEST(Lowpass, RejectsCutoffAboveNyquist) {
  std::vector<double> x(10, 0.0);
  EXPECT_THROW(lowpass_first_order(x, 30000.0, 1.0 / 48000), NyquistError);
}

}  // namespace
}  // namespace nprsim::spectral

#include "nprsim/acoustics.hpp"

#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "nprsim/archetypes.hpp"
#include "nprsim/calibration.hpp"
#include "nprsim/errors.hpp"

namespace nprsim {
namespace {

PathModel bare_path() {
  PathModel p;
  p.coupling_gain = 1.0;
  return p;
}

TEST(Spl, ReferenceValues) {
  EXPECT_NEAR(spl_to_pressure_amp(94.0), 1.0024, 1e-4);
  EXPECT_DOUBLE_EQ(spl_to_pressure_amp(0.0), 20e-6);
  EXPECT_NEAR(spl_to_pressure_amp(80.0) / spl_to_pressure_amp(60.0), 10.0, 1e-12);
  EXPECT_NEAR(pressure_amp_to_spl(spl_to_pressure_amp(71.3)), 71.3, 1e-12);
}

TEST(Propagate, IdentityPath) {
  AcousticSource s;
  s.ref_distance_m = s.position_distance_m = 0.02;
  EXPECT_DOUBLE_EQ(propagate(s, bare_path()).h, 1.0);
}

TEST(Propagate, InverseDistance) {
  AcousticSource s;
  s.position_distance_m = 0.04;
  const double h1 = propagate(s, bare_path()).h;
  s.position_distance_m = 0.08;
  EXPECT_NEAR(propagate(s, bare_path()).h, 0.5 * h1, 1e-15);
}

TEST(Propagate, PhaseDelayIsDistanceOverSpeed) {
  AcousticSource s;
  s.position_distance_m = 0.343;
  s.phase_rad = 0.25;
  const auto p = propagate(s, bare_path());
  EXPECT_NEAR(p.delay_s, 1e-3, 1e-15);
  EXPECT_NEAR(p.phase_rad, 0.25 + 1e-3, 1e-15);
}

TEST(Propagate, MonotoneInLengthLossAndDiameter) {
  AcousticSource s;
  s.waveform = ToneWave{600.0, 1.0};
  PathModel p = bare_path();
  double prev = 2.0;
  for (double L : {0.0, 1.0, 2.0, 3.0}) {
    p.tube.length_m = L;
    const double h = propagate(s, p).h;
    EXPECT_LE(h, prev);
    prev = h;
  }
  p.tube.length_m = 2.0;
  const double wide = propagate(s, p).h;
  p.tube.inner_diameter_m = inches(3.0 / 16.0);
  EXPECT_LT(propagate(s, p).h, wide);
  p.tube.pickup_device = true;
  const double pick = propagate(s, p).h;
  p.tube.pickup_device = false;
  EXPECT_LT(pick, propagate(s, p).h);
}

TEST(Propagate, RejectsBadSource) {
  AcousticSource s;
  s.spl_db = 150;
  EXPECT_THROW(propagate(s, bare_path()), ValidationError);
  s.spl_db = 60;
  s.position_distance_m = 0;
  EXPECT_THROW(propagate(s, bare_path()), ValidationError);
}

TEST(PortPressure, ZeroAmplitudeIsSilent) {
  AcousticSource s;
  s.waveform = ToneWave{700.0, 0.0};
  const auto p = port_pressure(s, bare_path(), {0.0, 1.0 / 48000, 480});
  for (double v : p) EXPECT_EQ(v, 0.0);
}

TEST(PortPressure, ToneAmplitudeIsHA0) {
  AcousticSource s;
  s.spl_db = 70;
  s.position_distance_m = 0.05;
  s.waveform = ToneWave{500.0, 1.0};
  PathModel path = bare_path();
  path.tube.length_m = 1.0;
  const double expect = propagate(s, path).h * s.full_scale_amplitude_pa();
  const auto p = port_pressure(s, path, {0.0, 1.0 / 48000, 48000});
  double mx = 0.0;
  for (double v : p) mx = std::max(mx, std::abs(v));
  EXPECT_NEAR(mx, expect, 1e-6 * expect + 1e-9);
}

TEST(PortPressure, LinearInAmplitude) {
  auto audio = std::make_shared<AudioBuffer>();
  for (int i = 0; i < 500; ++i) audio->samples.push_back(0.3 * std::sin(0.05 * i));
  AcousticSource s;
  s.waveform = SampledWave{audio, 600.0};
  const auto a = port_pressure(s, bare_path(), {0.0, 1.0 / 48000, 500});
  auto louder = std::make_shared<AudioBuffer>(*audio);
  for (double& v : louder->samples) v *= 2.0;
  s.waveform = SampledWave{louder, 600.0};
  const auto b = port_pressure(s, bare_path(), {0.0, 1.0 / 48000, 500});
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], 2.0 * a[i], 1e-15);
}

TEST(PortPressure, SampledWaveIsDelayedBySamples) {
  auto audio = std::make_shared<AudioBuffer>();
  audio->samples.assign(200, 0.0);
  audio->samples[10] = 0.5;
  AcousticSource s;
  s.ref_distance_m = s.position_distance_m = 343.0 * 5.0 / 48000;  // 5 samples away
  s.waveform = SampledWave{audio, 600.0};
  const auto p = port_pressure(s, bare_path(), {0.0, 1.0 / 48000, 200});
  EXPECT_EQ(p[10], 0.0);
  EXPECT_GT(p[15], 0.0);
}

TEST(PortPressure, RateMismatchIsAnError) {
  auto audio = std::make_shared<AudioBuffer>();
  audio->sample_rate_hz = 44100;
  audio->samples.assign(10, 0.1);
  AcousticSource s;
  s.waveform = SampledWave{audio, 600.0};
  EXPECT_THROW(port_pressure(s, bare_path(), {0.0, 1.0 / 48000, 10}), SampleRateMismatchError);
}

TEST(PortPressure, SaturationClamp) {
  AcousticSource s;
  s.spl_db = 100;
  s.waveform = ToneWave{500.0, 1.0};
  PathModel p = bare_path();
  p.saturation_pa = 0.5;
  for (double v : port_pressure(s, p, {0.0, 1.0 / 48000, 1000})) EXPECT_LE(std::abs(v), 0.5);
}

// Forged-pressure orderings over tube geometry and pickup device.
class TubeGeometry : public ::testing::Test {
 protected:
  double forged(double length, double dia_in, bool pickup) const {
    PathModel p;
    p.tube.length_m = length;
    p.tube.inner_diameter_m = inches(dia_in);
    p.tube.pickup_device = pickup;
    AcousticSource s;
    s.spl_db = 65;
    s.position_distance_m = 0.002;
    return forged_at_resonance(archetype("A1011-00"), p, s, SegmentSchedule{});
  }
};

TEST_F(TubeGeometry, ForgedFallsWithLengthAndIsLowerForNarrowTube) {
  double prev_wide = 1e300, prev_narrow = 1e300;
  for (double L : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    const double wide = forged(L, 5.0 / 16.0, false);
    const double narrow = forged(L, 3.0 / 16.0, false);
    EXPECT_LT(wide, prev_wide) << L;
    EXPECT_LT(narrow, prev_narrow) << L;
    EXPECT_LT(narrow, wide) << L;
    prev_wide = wide;
    prev_narrow = narrow;
  }
}

TEST_F(TubeGeometry, PickupDeviceNeverRaisesForgedPressure) {
  for (double L : {1.0, 2.0, 3.0, 4.0, 5.0}) EXPECT_LE(forged(L, 5.0 / 16.0, true), forged(L, 5.0 / 16.0, false)) << L;
}

TEST_F(TubeGeometry, PhoneSourceAtPortLandsInCalibrationWindow) {
  // 65 dB at 0.1 cm behind a 1 m tube
  PathModel p;
  p.tube.length_m = 1.0;
  AcousticSource s;
  s.spl_db = 65;
  s.position_distance_m = 0.001;
  SegmentSchedule sched;
  sched.interval_s = 45e-3;
  const double v = forged_at_resonance(archetype("A1011-00"), p, s, sched);
  EXPECT_GE(v, 12.0);
  EXPECT_LE(v, 33.0);
}

}  // namespace
}  // namespace nprsim

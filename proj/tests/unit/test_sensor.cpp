#include "nprsim/sensor.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nprsim/archetypes.hpp"
#include "nprsim/errors.hpp"

namespace nprsim {
namespace {

TubeAssembly tube(double length_m, double diameter_in = 5.0 / 16.0) {
  TubeAssembly t;
  t.length_m = length_m;
  t.inner_diameter_m = inches(diameter_in);
  return t;
}

double steady_amplitude(const DpsModel& m, const TubeAssembly& t, double f, double amp = 1.0) {
  const double f_h = resonant_hz(m, t);
  const double dt = std::min(max_stable_dt(f_h), max_stable_dt(f));
  const double settle = 8.0 / (m.damping_ratio * kTwoPi * f_h);
  const auto n = static_cast<std::size_t>((settle + 20.0 / f) / dt);
  const auto out = step_response(m, t, [&](double time) { return amp * std::sin(kTwoPi * f * time); }, n, dt);
  double peak = 0.0;
  for (std::size_t i = static_cast<std::size_t>(settle / dt); i < out.size(); ++i)
    peak = std::max(peak, std::hypot(out[i].p_out, out[i].p_out_rate / (kTwoPi * f)));
  return peak;
}

TEST(NaturalResonance, A1011InTableBand) {
  const double f = natural_resonant_hz(archetype("A1011-00"));
  EXPECT_GE(f, 680.0);
  EXPECT_LE(f, 690.0);
}

TEST(NaturalResonance, StiffnessTimesFourDoublesFrequency) {
  DpsModel m = archetype("A1011-00");
  const double f0 = natural_resonant_hz(m);
  m.diaphragm_stiffness *= 4.0;
  EXPECT_DOUBLE_EQ(natural_resonant_hz(m), 2.0 * f0);
}

TEST(NaturalResonance, UnitCase) {
  DpsModel m = archetype("A1011-00");
  m.diaphragm_stiffness = 1.0;
  m.moving_mass = 1.0;
  EXPECT_NEAR(natural_resonant_hz(m), 0.1591549430918953, 1e-15);
}

TEST(DpsModel, ValidateRejectsMiscalibratedBand) {
  DpsModel m = archetype("A1011-00");
  m.diaphragm_stiffness *= 1.1;
  EXPECT_THROW(m.validate(), ValidationError);
  m = archetype("A1011-00");
  m.damping_ratio = -0.1;
  EXPECT_THROW(m.validate(), ValidationError);
  m = archetype("A1011-00");
  m.pressure_range_pa = {10, 5};
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(TubeAssembly, CrossSectionMatchesDiameter) {
  const auto t = tube(1.0);
  const double d = inches(5.0 / 16.0);
  EXPECT_NEAR(t.cross_section_m2(), std::numbers::pi * d * d / 4.0, 1e-15);
  TubeAssembly bad;
  bad.length_m = -1;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(HelmholtzResonance, RejectsMissingTube) {
  EXPECT_THROW(helmholtz_resonant_hz(archetype("A1011-00"), tube(0.0)), ValidationError);
}

TEST(HelmholtzResonance, DoublingLengthDividesBySqrt2) {
  const auto m = archetype("P993-1B");
  const double a = helmholtz_resonant_hz(m, tube(0.7));
  const double b = helmholtz_resonant_hz(m, tube(1.4));
  EXPECT_NEAR(a / b, std::sqrt(2.0), 1e-12);
}

TEST(HelmholtzResonance, DecreasesWithLengthForResonantArchetypes) {
  for (const auto& m : builtin_archetypes()) {
    if (!m.band_reported) continue;
    double prev = 1e300;
    for (double L : {0.4, 0.8, 1.2, 1.6, 2.0}) {
      const double f = helmholtz_resonant_hz(m, tube(L));
      EXPECT_LT(f, prev) << m.part_id << " L=" << L;
      prev = f;
    }
  }
}

TEST(HelmholtzResonance, A1011GoldenAtOneMetre) {
  // direct evaluation with S = 3704.8521000809233, M = 2e-4, V = 7.517618000672586
  EXPECT_NEAR(helmholtz_resonant_hz(archetype("A1011-00"), tube(1.0)), 602.8000000000001, 1e-9);
}

TEST(StepResponse, ConstantInletHasUnitDcGain) {
  for (double xi : {0.05, 0.7, 1.0, 2.0}) {
    const auto m = archetype("A1011-00").with_damping(xi);
    const std::vector<double> inlet(48000, 3.0);
    const auto out = step_response(m, tube(1.0), inlet, 1.0 / 48000);
    EXPECT_NEAR(out.back().p_out / 3.0, 1.0, 1e-3) << "xi=" << xi;
  }
}

TEST(StepResponse, StartsAtRest) {
  const std::vector<double> inlet(10, 1.0);
  const auto out = step_response(archetype("A1011-00"), tube(0), inlet, 1.0 / 48000);
  EXPECT_EQ(out.front().p_out, 0.0);
  EXPECT_EQ(out.front().p_out_rate, 0.0);
  EXPECT_EQ(out.front().time, 0.0);
  EXPECT_DOUBLE_EQ(out[3].time, 3.0 / 48000);
}

TEST(StepResponse, ResonantGainMatchesClosedForm) {
  const double xi = 0.05;
  const auto m = archetype("A1011-00").with_damping(xi);
  const auto t = tube(1.0);
  const double gain = steady_amplitude(m, t, resonant_hz(m, t));
  EXPECT_NEAR(gain / (1.0 / (2.0 * xi * std::sqrt(1.0 - xi * xi))), 1.0, 0.02);
}

TEST(StepResponse, PeakNearDampedResonance) {
  const double xi = 0.05;
  const auto m = archetype("SDP810-500PA").with_damping(xi);
  const auto t = tube(0.8);
  const double f_h = resonant_hz(m, t);
  double best_f = 0.0, best = 0.0;
  for (double r = 0.5; r <= 1.5 + 1e-9; r += 0.005) {
    const double a = steady_amplitude(m, t, r * f_h);
    if (a > best) {
      best = a;
      best_f = r * f_h;
    }
  }
  const double oracle = f_h * std::sqrt(1.0 - 2.0 * xi * xi);
  EXPECT_NEAR(best_f / oracle, 1.0, 0.02);
}

TEST(StepResponse, RejectsCoarseStep) {
  const auto m = archetype("A1011-00");
  const std::vector<double> inlet(10, 1.0);
  EXPECT_THROW(step_response(m, tube(0), inlet, 1.0 / 1000), UnstableStepError);
}

TEST(StepResponse, RejectsNonFiniteInlet) {
  std::vector<double> inlet(10, 1.0);
  inlet[4] = std::nan("");
  EXPECT_THROW(step_response(archetype("A1011-00"), tube(0), inlet, 1.0 / 48000), NonFiniteInputError);
}

TEST(StepResponse, Deterministic) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> inlet(4000);
  for (double& v : inlet) v = g(rng);
  const auto m = archetype("A1011-00").with_damping(0.3);
  const auto a = step_response(m, tube(1.0), inlet, 1.0 / 48000);
  const auto b = step_response(m, tube(1.0), inlet, 1.0 / 48000);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].p_out, b[i].p_out);
}

TEST(StepResponse, FourthOrderConvergence) {
  const auto m = archetype("A1011-00").with_damping(0.2);
  const auto t = tube(1.0);
  const double f_h = resonant_hz(m, t);
  auto inlet = [&](double time) { return std::sin(kTwoPi * 0.7 * f_h * time) + 0.5 * std::cos(kTwoPi * 130.0 * time); };
  const double h = max_stable_dt(f_h);
  const double horizon = 240 * h;
  auto end_value = [&](double dt) {
    const auto n = static_cast<std::size_t>(std::llround(horizon / dt)) + 1;  // horizon is a multiple of every dt
    return step_response(m, t, inlet, n, dt).back().p_out;
  };
  const double ref = end_value(h / 64);
  const double e1 = std::abs(end_value(h) - ref);
  const double e2 = std::abs(end_value(h / 2) - ref);
  EXPECT_GE(e1 / e2, 8.0);
}

TEST(StepResponse, SampledInletConvergesToo) {
  const auto m = archetype("A1011-00").with_damping(0.2);
  const auto t = tube(1.0);
  const double f_h = resonant_hz(m, t);
  const double h = max_stable_dt(f_h);
  const double horizon = 240 * h;
  auto end_value = [&](double dt) {
    const auto n = static_cast<std::size_t>(std::llround(horizon / dt)) + 1;  // horizon is a multiple of every dt
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::sin(kTwoPi * 0.7 * f_h * i * dt);
    return step_response(m, t, u, dt).back().p_out;
  };
  const double ref = end_value(h / 64);
  EXPECT_GE(std::abs(end_value(h) - ref) / std::abs(end_value(h / 2) - ref), 8.0);
}

TEST(PeakDecay, BoundaryAndLimit) {
  const double w = kTwoPi * 680.0;
  EXPECT_DOUBLE_EQ(peak_decay(2.5, 100.0, w, 0.0), 2.5);
  EXPECT_NEAR(peak_decay(2.5, 100.0, w, 1.0), 0.0, 1e-12);
}

TEST(PeakDecay, Golden) {
  EXPECT_NEAR(peak_decay(1.0, 0.0, kTwoPi * 680.0, 1e-3), 0.07353095123801738, 1e-15);
}

TEST(PeakDecay, NoSignChangeWhenReleaseIsNotTooSteep) {
  const double w = kTwoPi * 600.0;
  for (double v0 : {-w, -0.5 * w, 0.0, 3.0 * w})
    for (double t = 0.0; t < 0.05; t += 1e-5) ASSERT_GT(peak_decay(1.0, v0, w, t), 0.0) << v0 << ' ' << t;
}

TEST(PeakDecay, MatchesIntegratorForCriticalDamping) {
  const auto m = archetype("A1011-00");
  const auto t = tube(1.0);
  const double w = kTwoPi * resonant_hz(m, t);
  HelmholtzIntegrator integ(w, 1.0);
  integ.reset(2.0, 1500.0);
  const double dt = 1.0 / 48000;
  for (int i = 1; i <= 400; ++i) {
    integ.step(0, 0, 0, dt);
    ASSERT_NEAR(integ.p(), peak_decay(2.0, 1500.0, w, i * dt), 1e-5);  // RK4 global error at 48 kHz
  }
}

TEST(FrequencySweep, A1011NoTubeFindsTableBand) {
  const auto band = frequency_sweep(archetype("A1011-00").with_damping(0.05), tube(0));
  EXPECT_LE(band.band_hz.lo, 680.0);
  EXPECT_GE(band.band_hz.hi, 690.0);
  EXPECT_NEAR(band.center_hz, 685.0, 20.0);
}

TEST(FrequencySweep, ResonanceAboveRangeIsNotFound) {
  SweepConfig cfg;
  cfg.lo_hz = 50;
  cfg.hi_hz = 2000;
  EXPECT_THROW(frequency_sweep(archetype("TBPDPNS100PGUCV").with_damping(0.05), tube(0), cfg), NoResonanceError);
}

TEST(FrequencySweep, DirectionDoesNotMatter) {
  SweepConfig up;
  up.lo_hz = 300;
  up.hi_hz = 1200;
  SweepConfig down = up;
  down.direction = SweepDirection::down;
  const auto m = archetype("P993-1B").with_damping(0.05);
  const auto a = frequency_sweep(m, tube(0.6), up);
  const auto b = frequency_sweep(m, tube(0.6), down);
  EXPECT_EQ(a.center_hz, b.center_hz);
  EXPECT_EQ(a.peak_pa, b.peak_pa);
}

TEST(FrequencySweep, RandomizedModelsMatchAnalyticResonance) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> fmid(300.0, 3000.0), len(0.2, 3.0), dia(3.0 / 16.0, 3.0 / 8.0);
  for (int k = 0; k < 12; ++k) {
    const double f = fmid(rng);
    const auto m = DpsModel::calibrated("rnd" + std::to_string(k), Transducer::capacitive, {-100, 100},
                                        {f - 5, f + 5}, 0.05);
    const auto t = tube(len(rng), dia(rng));
    const double f_h = resonant_hz(m, t);
    SweepConfig cfg;
    cfg.lo_hz = 50;
    cfg.hi_hz = std::max(2.0 * f_h, 500.0);
    const auto band = frequency_sweep(m, t, cfg);
    EXPECT_NEAR(band.center_hz, f_h, 20.0) << "model " << k;
  }
}

TEST(FrequencySweep, RejectsShortDwell) {
  SweepConfig cfg;
  cfg.dwell_s = 1e-3;
  EXPECT_THROW(frequency_sweep(archetype("A1011-00").with_damping(0.05), tube(0), cfg), ValidationError);
}

}  // namespace
}  // namespace nprsim

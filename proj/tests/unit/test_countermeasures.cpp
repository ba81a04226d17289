#include "nprsim/countermeasures.hpp"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "nprsim/archetypes.hpp"
#include "nprsim/errors.hpp"
#include "nprsim/scenario.hpp"

namespace nprsim {
namespace {

ScenarioFile loud() { return load_scenario(std::string(NPRSIM_SOURCE_DIR) + "/scenarios/countermeasures_90db.json"); }

TEST(ApplyLpf, DcGainAndCutoff) {
  const double dt = 1.0 / 48000;
  std::vector<double> dc(4800, 3.0);
  for (double v : apply_lpf(dc, 120.0, dt)) EXPECT_NEAR(v, 3.0, 3e-3);
  std::vector<double> x(96000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(kTwoPi * 120.0 * i * dt);
  const auto y = apply_lpf(x, 120.0, dt);
  double ex = 0, ey = 0;
  for (std::size_t i = 48000; i < x.size(); ++i) {
    ex += x[i] * x[i];
    ey += y[i] * y[i];
  }
  EXPECT_NEAR(std::sqrt(ey / ex), 1.0 / std::sqrt(2.0), 0.05 / std::sqrt(2.0));
  EXPECT_THROW(apply_lpf(x, 25000.0, dt), NyquistError);
}

TEST(Countermeasure, Invariants) {
  EXPECT_THROW(Countermeasure::long_tube(0.0).validate(), ValidationError);
  EXPECT_THROW(Countermeasure::enclosure(-1.0).validate(), ValidationError);
  EXPECT_THROW(Countermeasure::lpf(0.0).validate(), ValidationError);
  EXPECT_THROW(Countermeasure::raised_setpoint(5.0).validate(), ValidationError);
  EXPECT_THROW(countermeasure_kind_from_string("nonsense"), ValidationError);
  Countermeasure mic;
  mic.kind = CountermeasureKind::microphone;
  EXPECT_THROW(mic.validate(), ValidationError);
}

TEST(Evaluate, LongTubeDefeatsNinetyDb) {
  const auto file = loud();
  const auto rep = evaluate_countermeasure(file.scenario, Countermeasure::long_tube(7.5));
  EXPECT_TRUE(rep.baseline_attack_success);
  EXPECT_LT(rep.residual_forged_pa, cm_defaults::kNoiseFloorPa);
  EXPECT_TRUE(rep.below_noise_floor);
  EXPECT_FALSE(rep.attack_success);
  EXPECT_GT(rep.penalty.added_delay_s, 0.0);
}

TEST(Evaluate, EnclosurePenaltyNonzero) {
  const auto rep = evaluate_countermeasure(loud().scenario, Countermeasure::enclosure(40));
  EXPECT_LT(rep.residual_forged_pa, rep.baseline_forged_pa);
  EXPECT_GT(rep.penalty.added_delay_s, 0.0);
  EXPECT_GT(rep.penalty.attenuation, 0.0);
}

TEST(Evaluate, RaisedSetpointKeepsRoomNegative) {
  const auto file = load_scenario(std::string(NPRSIM_SOURCE_DIR) + "/scenarios/raised_setpoint.json");
  const auto rep = evaluate_countermeasure(file.scenario, Countermeasure::raised_setpoint(-20));
  EXPECT_TRUE(rep.baseline_attack_success);
  EXPECT_FALSE(rep.attack_success);
  EXPECT_NEAR(rep.steady_true_pd[0], -12.0, 0.5);
}

TEST(Evaluate, ResidualMonotoneInTubeLength) {
  const auto sc = loud().scenario;
  double prev = 1e300;
  for (double L : {1.0, 3.0, 5.0, 7.0}) {
    const double r = evaluate_countermeasure(sc, Countermeasure::long_tube(L)).residual_forged_pa;
    EXPECT_LE(r, prev) << L;
    prev = r;
  }
}

TEST(Evaluate, ResidualMonotoneInEnclosureLossAndCutoff) {
  const auto sc = loud().scenario;
  double prev = 1e300;
  for (double db : {0.0, 10.0, 20.0, 40.0}) {
    const double r = evaluate_countermeasure(sc, Countermeasure::enclosure(db)).residual_forged_pa;
    EXPECT_LE(r, prev) << db;
    prev = r;
  }
  prev = 1e300;
  for (double fc : {500.0, 300.0, 120.0, 60.0}) {
    const double r = evaluate_countermeasure(sc, Countermeasure::lpf(fc)).residual_forged_pa;
    EXPECT_LE(r, prev) << fc;
    prev = r;
  }
}

TEST(Evaluate, ForgedOnlyScenarioRejectsAcousticDefence) {
  const auto file = load_scenario(std::string(NPRSIM_SOURCE_DIR) + "/scenarios/raised_setpoint.json");
  EXPECT_THROW(evaluate_countermeasure(file.scenario, Countermeasure::long_tube(7.5)), ValidationError);
}

TEST(Report, CsvRowMatchesHeader) {
  const auto rep = evaluate_countermeasure(loud().scenario, Countermeasure::lpf(120));
  std::ostringstream os;
  write_report_csv_header(os);
  write_report_csv_row(os, rep);
  std::istringstream is(os.str());
  std::string h, r;
  std::getline(is, h);
  std::getline(is, r);
  EXPECT_EQ(std::count(h.begin(), h.end(), ','), std::count(r.begin(), r.end(), ','));
}

}  // namespace
}  // namespace nprsim

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "osclab/beamline.hpp"
#include "osclab/daq.hpp"
#include "osclab/errors.hpp"
#include "osclab/trace_io.hpp"

using namespace osclab;

namespace {

DaqConfig noiseless(LaserSpec laser = LaserSpec::hene()) {
  DaqConfig c;
  c.laser = std::move(laser);
  c.noise = NoiseModel::noiseless();
  return c;
}

// Closed-form prediction for a recorded sample (true position == reported when noiseless).
double expected_appearance(const DaqConfig& c, double theta_deg, double position_mm) {
  const double wedge = 2.0 * std::tan(c.crystal.wedge_angle_deg * std::numbers::pi / 180.0);
  const double dl = wedge * position_mm * 1e-3;
  const double dn = c.crystal.birefringence();
  const double retard = 2 * std::numbers::pi * dn * c.crystal.base_thickness_mm * 1e-3 / c.laser.center_wavelength_m;
  const double phase = 2 * std::numbers::pi * dn * dl / c.laser.center_wavelength_m + retard;
  return std::pow(std::sin(2 * theta_deg * std::numbers::pi / 180), 2) * std::pow(std::sin(phase / 2), 2);
}

}  // namespace

TEST(ScanPlan, CountsAndValidation) {
  EXPECT_EQ(ScanPlan{}.sample_count(), 101u);
  EXPECT_DOUBLE_EQ(ScanPlan{}.duration_s(), 10.0);
  EXPECT_THROW((ScanPlan{0, 5.5, 0.0, 10}.validate()), InvalidArgument);
  EXPECT_THROW((ScanPlan{0, 5.5, 1.0, 0}.validate()), InvalidArgument);
  EXPECT_THROW((ScanPlan{1, 1, 1.0, 10}.validate()), InvalidArgument);
}

TEST(Daq, DefaultScanHas101MonotoneSamples) {
  Daq daq(noiseless());
  const Trace t = daq.run_scan(ScanPlan{});
  ASSERT_EQ(t.samples.size(), 101u);
  EXPECT_DOUBLE_EQ(t.samples.front().position_mm, 0.0);
  EXPECT_DOUBLE_EQ(t.samples.back().position_mm, 5.5);
  for (std::size_t i = 1; i < t.samples.size(); ++i) {
    EXPECT_GE(t.samples[i].t_s, t.samples[i - 1].t_s);
    EXPECT_GE(t.samples[i].position_mm, t.samples[i - 1].position_mm);
  }
  EXPECT_EQ(daq.session(), Session::manual);
}

TEST(Daq, NoiselessHeneOnClosedFormAndUnitary) {
  for (double rot : {0.0, 15.0}) {
    Daq daq(noiseless());
    daq.set_rotation(rot);
    const Trace t = daq.run_scan(ScanPlan{0, 5.5, 0.55, 50});
    for (const auto& s : t.samples) {
      const auto p = normalized_probabilities({s.i1, s.i2}, daq.config().beamline);
      EXPECT_NEAR(p.p_appear, expected_appearance(daq.config(), 45.0 - rot, s.position_mm), 1e-9);
      EXPECT_NEAR(p.p_appear + p.p_survive, 1.0, 1e-9);
      EXPECT_NEAR(s.theta_deg, 45.0 - rot, 1e-12);
    }
  }
}

TEST(Daq, DeterministicForSameSeed) {
  DaqConfig c;
  c.noise.seed = 1234;
  Daq a(c), b(c);
  EXPECT_EQ(trace_to_csv(a.run_scan({})), trace_to_csv(b.run_scan({})));
  DaqConfig d = c;
  d.noise.seed = 1235;
  Daq e(d);
  Daq f(c);
  EXPECT_NE(trace_to_csv(e.run_scan({})), trace_to_csv(f.run_scan({})));
}

TEST(Daq, IntensityNoiseHasConfiguredSigma) {
  DaqConfig c;
  c.noise = {0.01, 0.0, 77};
  Daq daq(c);
  const Trace t = daq.run_scan(ScanPlan{0, 5.5, 0.5, 2000});  // 22001 samples
  ASSERT_GE(t.samples.size(), 10000u);
  double sum2 = 0;
  for (const auto& s : t.samples) {
    const double p = expected_appearance(c, 45, s.position_mm);
    const auto ideal = detector_readings({p, 1 - p}, c.beamline);
    sum2 += std::pow(s.i2 - ideal.i2, 2) + std::pow(s.i1 - ideal.i1, 2);
  }
  const double sigma = std::sqrt(sum2 / (2.0 * t.samples.size()));
  EXPECT_NEAR(sigma, 0.01, 0.002);
}

TEST(Daq, ReverseScanTracesSameCurve) {
  Daq fwd(noiseless()), rev(noiseless());
  const Trace a = fwd.run_scan({0, 5.5, 0.55, 10});
  const Trace b = rev.run_scan({5.5, 0, 0.55, 10});
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& x = a.samples[i];
    const auto& y = b.samples[b.samples.size() - 1 - i];
    EXPECT_NEAR(x.position_mm, y.position_mm, 1e-12);
    EXPECT_NEAR(x.i2, y.i2, 1e-9);
  }
  for (std::size_t i = 1; i < b.samples.size(); ++i) EXPECT_LE(b.samples[i].position_mm, b.samples[i - 1].position_mm);
}

TEST(Daq, SteppingReproducesBatchScan) {
  DaqConfig c;
  c.noise.seed = 99;
  c.laser = LaserSpec::diode();
  const ScanPlan plan{0, 5.5, 0.55, 8};
  Daq batch(c), stepped(c);
  const Trace a = batch.run_scan(plan);
  stepped.begin_scan(plan);
  stepped.step(0.0);
  while (stepped.session() == Session::scan) stepped.step(0.125);
  const Trace& b = stepped.trace();
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i], b.samples[i]) << i;
}

TEST(Daq, SessionRules) {
  Daq daq(noiseless());
  EXPECT_EQ(daq.session(), Session::idle);
  EXPECT_THROW(daq.step(0.1), NoActiveSession);
  daq.begin_manual();
  EXPECT_TRUE(daq.set_position(7.0).clamped);
  EXPECT_DOUBLE_EQ(daq.rig().position_mm, 5.5);
  const Sample s = daq.step(0.1);
  EXPECT_DOUBLE_EQ(s.position_mm, 5.5);
  daq.begin_scan({});
  EXPECT_THROW(daq.set_position(1.0), PreconditionError);
  EXPECT_NO_THROW(daq.set_rotation(10.0));
  daq.stop();
  EXPECT_EQ(daq.session(), Session::idle);
  EXPECT_FALSE(daq.active_plan().has_value());
  EXPECT_THROW(daq.step(-1.0), NoActiveSession);
}

TEST(Daq, ThetaZeroIsFlat) {
  Daq daq(noiseless());
  daq.set_rotation(45.0);
  const Trace t = daq.run_scan({});
  for (const auto& s : t.samples) EXPECT_NEAR(s.i2, 0.0, 1e-9);
}

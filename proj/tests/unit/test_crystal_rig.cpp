#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "osclab/crystal_rig.hpp"
#include "osclab/errors.hpp"

using namespace osclab;

constexpr double kFrozenFullTravelUm = 38.39739949755875;

TEST(Crystal, DefaultsAndBirefringence) {
  const CrystalDoublet d;
  EXPECT_NO_THROW(d.validate());
  EXPECT_NEAR(d.birefringence(), 0.057, 1e-12);
}

TEST(Crystal, ValidationRejectsBadGeometry) {
  CrystalDoublet d;
  d.wedge_angle_deg = 0.0;
  EXPECT_THROW(d.validate(), InvalidArgument);
  d = {};
  d.travel_range_mm = -1.0;
  EXPECT_THROW(d.validate(), InvalidArgument);
  d = {};
  d.n_extra = d.n_ord;
  EXPECT_THROW(d.validate(), InvalidArgument);
}

TEST(Rig, FullTravelPathChange) {
  const CrystalDoublet d;
  const auto dl = path_length_change({5.5, 0.0}, d);
  EXPECT_FALSE(dl.clamped);
  EXPECT_NEAR(dl.value * 1e6, kFrozenFullTravelUm, 1e-9);
  EXPECT_NEAR(dl.value * 1e6, 38.0, 38.0 * 0.02);
}

TEST(Rig, PathLengthIsAffineWithExpectedSlope) {
  const CrystalDoublet d;
  const double slope = 2.0 * std::tan(d.wedge_angle_deg * std::numbers::pi / 180.0);
  const double h = 0.25;
  for (int i = 0; i < 20; ++i) {
    const double s = 0.2 * i;
    // differenced on dL: the 10 mm base would cost ~1e-12 to cancellation alone
    const double fd = (path_length_change({s + h, 0}, d).value - path_length_change({s, 0}, d).value) / (h * 1e-3);
    EXPECT_NEAR(fd / slope, 1.0, 1e-12);
    EXPECT_NEAR(path_length({s, 0}, d).value, 10e-3 + path_length_change({s, 0}, d).value, 1e-17);
  }
  EXPECT_NEAR(path_length({0, 0}, d).value, 10e-3, 1e-15);
}

TEST(Rig, ClampsOutOfRange) {
  const CrystalDoublet d;
  auto st = make_rig_state(7.0, 60.0, d);
  EXPECT_TRUE(st.clamped);
  EXPECT_DOUBLE_EQ(st.value.position_mm, 5.5);
  EXPECT_DOUBLE_EQ(st.value.table_rotation_deg, 45.0);
  st = make_rig_state(-1.0, -50.0, d);
  EXPECT_TRUE(st.clamped);
  EXPECT_DOUBLE_EQ(st.value.position_mm, 0.0);
  EXPECT_DOUBLE_EQ(st.value.table_rotation_deg, -45.0);
  EXPECT_FALSE(make_rig_state(2.0, 10.0, d).clamped);
  EXPECT_TRUE(path_length({9.0, 0}, d).clamped);
  EXPECT_THROW(make_rig_state(std::nan(""), 0.0, d), InvalidArgument);
}

TEST(Rig, MixingAngleFromRotation) {
  EXPECT_NEAR(mixing_angle({0, 0}).degrees(), 45.0, 1e-12);
  EXPECT_NEAR(mixing_angle({0, 15}).degrees(), 30.0, 1e-12);
  EXPECT_NEAR(mixing_angle({0, 45}).degrees(), 0.0, 1e-12);
  EXPECT_NEAR(mixing_angle({0, -45}).degrees(), 90.0, 1e-12);
  for (int r = -45; r <= 45; ++r) {
    const double th = mixing_angle({0, double(r)}).degrees();
    EXPECT_GE(th, 0.0);
    EXPECT_LE(th, 90.0);
  }
}

TEST(Potentiometer, RoundTrip) {
  const CrystalDoublet d;
  const PotentiometerCalibration cal{0.3, 1.7};
  for (int i = 0; i <= 55; ++i) {
    const double s = 0.1 * i;
    const auto back = potentiometer_to_position(position_to_voltage(s, cal), cal, d);
    EXPECT_NEAR(back.value, s, 1e-9);
    EXPECT_FALSE(back.clamped);
  }
  EXPECT_TRUE(potentiometer_to_position(100.0, cal, d).clamped);
  EXPECT_THROW(potentiometer_to_position(1.0, {0.0, 0.0}, d), InvalidArgument);
}

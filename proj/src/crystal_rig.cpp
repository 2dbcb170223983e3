#include "osclab/crystal_rig.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "osclab/errors.hpp"

namespace osclab {

namespace {

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

Clamped<double> clamp_flagged(double v, double lo, double hi) {
  const double c = std::clamp(v, lo, hi);
  return {c, c != v};
}

}  // namespace

void CrystalDoublet::validate() const {
  if (!(wedge_angle_deg > 0.0 && wedge_angle_deg < 5.0)) {
    throw InvalidArgument("wedge angle must lie in (0, 5) degrees");
  }
  if (!(travel_range_mm > 0.0)) throw InvalidArgument("travel range must be positive");
  if (!(base_thickness_mm > 0.0)) throw InvalidArgument("base thickness must be positive");
  if (!(n_ord > 0.0 && n_extra > 0.0)) throw InvalidArgument("refractive indices must be positive");
  if (n_extra == n_ord) throw InvalidArgument("crystal must be birefringent (n_extra != n_ord)");
}

double CrystalDoublet::birefringence() const { return std::abs(n_extra - n_ord); }

Clamped<RigState> make_rig_state(double position_mm, double rotation_deg, const CrystalDoublet& doublet) {
  if (!std::isfinite(position_mm) || !std::isfinite(rotation_deg)) {
    throw InvalidArgument("rig controls must be finite");
  }
  const auto pos = clamp_flagged(position_mm, 0.0, doublet.travel_range_mm);
  const auto rot = clamp_flagged(rotation_deg, -kMaxTableRotationDeg, kMaxTableRotationDeg);
  return {{pos.value, rot.value}, pos.clamped || rot.clamped};
}

Clamped<double> path_length(const RigState& rig, const CrystalDoublet& doublet) {
  const auto s = clamp_flagged(rig.position_mm, 0.0, doublet.travel_range_mm);
  const double mm = doublet.base_thickness_mm + 2.0 * s.value * std::tan(deg_to_rad(doublet.wedge_angle_deg));
  return {mm * 1e-3, s.clamped};
}

Clamped<double> path_length_change(const RigState& rig, const CrystalDoublet& doublet) {
  const auto s = clamp_flagged(rig.position_mm, 0.0, doublet.travel_range_mm);
  return {2.0 * s.value * std::tan(deg_to_rad(doublet.wedge_angle_deg)) * 1e-3, s.clamped};
}

MixingAngle mixing_angle(const RigState& rig) {
  const double rho = std::clamp(rig.table_rotation_deg, -kMaxTableRotationDeg, kMaxTableRotationDeg);
  return MixingAngle::from_degrees(45.0 - rho);
}

Clamped<double> potentiometer_to_position(double volts, const PotentiometerCalibration& cal,
                                          const CrystalDoublet& doublet) {
  if (cal.slope_v_per_mm == 0.0 || !std::isfinite(cal.slope_v_per_mm)) {
    throw InvalidArgument("degenerate potentiometer calibration (slope = 0)");
  }
  return clamp_flagged((volts - cal.v0) / cal.slope_v_per_mm, 0.0, doublet.travel_range_mm);
}

double position_to_voltage(double position_mm, const PotentiometerCalibration& cal) {
  return cal.v0 + cal.slope_v_per_mm * position_mm;
}

}  // namespace osclab

#pragma once

// Mechanical model of the wedge-crystal doublet on its rotatable table.
//
// Two crystals with a small wedge angle slide against each other; each moves
// by s transversally, so the beam path through birefringent material grows
// by 2 s tan(wedge). The table rotation rho sets the angle between the
// polarizer and the crystal axes; rho = 0 is the 45 degree standard pose.

#include "osclab/osc_core.hpp"

namespace osclab {

struct CrystalDoublet {
  double wedge_angle_deg = 0.2;
  double travel_range_mm = 5.5;
  double base_thickness_mm = 10.0;
  double n_ord = 1.552;
  double n_extra = 1.609;

  void validate() const;

  /// |n_extra - n_ord|
  double birefringence() const;
};

/// A value that may have been pulled back into its admissible range.
template <class T>
struct Clamped {
  T value{};
  bool clamped = false;
};

inline constexpr double kMaxTableRotationDeg = 45.0;

struct RigState {
  double position_mm = 0.0;
  double table_rotation_deg = 0.0;
};

/// Builds a rig state, clamping position to [0, travel] and rotation to [-45, 45].
Clamped<RigState> make_rig_state(double position_mm, double rotation_deg, const CrystalDoublet& doublet);

/// Geometric path through the doublet, meters. Over-travel is clamped and flagged.
Clamped<double> path_length(const RigState& rig, const CrystalDoublet& doublet);

/// path_length minus the base thickness, meters.
Clamped<double> path_length_change(const RigState& rig, const CrystalDoublet& doublet);

/// theta = 45 deg - rho, reflected into [0, 90] deg.
MixingAngle mixing_angle(const RigState& rig);

struct PotentiometerCalibration {
  double v0 = 0.0;
  double slope_v_per_mm = 1.0;
};

/// s = (v - v0) / slope, clamped to the travel range.
Clamped<double> potentiometer_to_position(double volts, const PotentiometerCalibration& cal,
                                          const CrystalDoublet& doublet);

double position_to_voltage(double position_mm, const PotentiometerCalibration& cal);

}  // namespace osclab

#pragma once

// Two-state mixing and coherent propagation.
//
// The same algebra serves both readings of the system: flavor/mass
// eigenstates of a neutrino and polarizer/crystal-axis polarization states
// of light. A state is prepared in flavor 1, rotated into the propagation
// basis, picks up a diagonal phase per component, and is projected back.

#include <complex>

#include <Eigen/Core>

namespace osclab {

using Complex = std::complex<double>;

/// Complex amplitudes of the two basis states.
struct TwoStateAmplitudes {
  Complex a1{1.0, 0.0};
  Complex a2{0.0, 0.0};

  double norm_squared() const { return std::norm(a1) + std::norm(a2); }

  static TwoStateAmplitudes flavor1() { return {{1.0, 0.0}, {0.0, 0.0}}; }
  static TwoStateAmplitudes flavor2() { return {{0.0, 0.0}, {1.0, 0.0}}; }
};

/// Rotation angle between the flavor and propagation bases, held in [0, pi/2].
///
/// Any real input is mapped into the canonical range: first modulo pi
/// (U(theta + pi) = -U(theta) is the same physical rotation), then reflected
/// about pi/2. Both maps leave every transition probability unchanged.
class MixingAngle {
 public:
  MixingAngle() = default;
  explicit MixingAngle(double radians);

  static MixingAngle from_degrees(double degrees);

  double radians() const { return theta_; }
  double degrees() const;

 private:
  double theta_ = 0.0;
};

/// Propagation phases accumulated by the two eigen-components.
struct PhasePair {
  double phi1 = 0.0;
  double phi2 = 0.0;

  double difference() const { return phi2 - phi1; }
};

struct TransitionResult {
  double p_appear = 0.0;
  double p_survive = 1.0;
};

/// [[cos, -sin], [sin, cos]]: maps propagation-basis amplitudes to flavor amplitudes.
Eigen::Matrix2d mixing_matrix(MixingAngle theta);

/// Multiplies component k by exp(-i phi_k).
TwoStateAmplitudes propagate(const TwoStateAmplitudes& state, PhasePair phases);

/// Evaluates <f2| U diag(e^{-i phi1}, e^{-i phi2}) U^-1 |f1> (and the <f1| element)
/// by explicit complex matrix products.
TransitionResult transition_probability_chain(MixingAngle theta, PhasePair phases);

/// sin^2(2 theta) sin^2(delta_phi / 2), delta_phi = phi2 - phi1.
TransitionResult transition_probability_closed(MixingAngle theta, double delta_phi);

}  // namespace osclab

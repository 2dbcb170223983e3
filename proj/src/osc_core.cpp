#include "osclab/osc_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "osclab/errors.hpp"

namespace osclab {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

MixingAngle::MixingAngle(double radians) {
  if (!std::isfinite(radians)) {
    throw InvalidArgument("mixing angle must be finite");
  }
  double t = std::fmod(radians, kPi);
  if (t < 0.0) t += kPi;
  if (t > kPi / 2) t = kPi - t;
  theta_ = std::clamp(t, 0.0, kPi / 2);
}

MixingAngle MixingAngle::from_degrees(double degrees) { return MixingAngle(degrees * kPi / 180.0); }

double MixingAngle::degrees() const { return theta_ * 180.0 / kPi; }

Eigen::Matrix2d mixing_matrix(MixingAngle theta) {
  const double c = std::cos(theta.radians());
  const double s = std::sin(theta.radians());
  Eigen::Matrix2d u;
  u << c, -s,
       s,  c;
  return u;
}

TwoStateAmplitudes propagate(const TwoStateAmplitudes& state, PhasePair phases) {
  return {state.a1 * std::polar(1.0, -phases.phi1), state.a2 * std::polar(1.0, -phases.phi2)};
}

TransitionResult transition_probability_chain(MixingAngle theta, PhasePair phases) {
  const Eigen::Matrix2cd u = mixing_matrix(theta).cast<Complex>();
  const Eigen::Matrix2cd u_inv = u.transpose();  // real orthogonal

  Eigen::Matrix2cd propagation = Eigen::Matrix2cd::Zero();
  propagation(0, 0) = std::polar(1.0, -phases.phi1);
  propagation(1, 1) = std::polar(1.0, -phases.phi2);

  const Eigen::Vector2cd initial(Complex(1.0, 0.0), Complex(0.0, 0.0));
  const Eigen::Vector2cd final_state = u * (propagation * (u_inv * initial));

  const Eigen::Vector2cd survive_bra(Complex(1.0, 0.0), Complex(0.0, 0.0));
  const Eigen::Vector2cd appear_bra(Complex(0.0, 0.0), Complex(1.0, 0.0));
  return {clamp_probability(std::norm(appear_bra.dot(final_state))),
          clamp_probability(std::norm(survive_bra.dot(final_state)))};
}

TransitionResult transition_probability_closed(MixingAngle theta, double delta_phi) {
  const double amplitude = std::sin(2.0 * theta.radians());
  const double oscillation = std::sin(0.5 * delta_phi);
  const double p = clamp_probability(amplitude * amplitude * oscillation * oscillation);
  return {p, 1.0 - p};
}

}  // namespace osclab

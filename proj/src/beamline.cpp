#include "osclab/beamline.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "osclab/errors.hpp"
#include "osclab/phase_laws.hpp"

namespace osclab {

namespace {

constexpr double kPi = std::numbers::pi;
// FWHM = 2 sqrt(2 ln 2) sigma
const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::log(2.0));

void check_quadrature_points(int points) {
  if (points < 3 || points % 2 == 0) {
    throw InvalidArgument("quadrature needs an odd number of nodes >= 3, got " + std::to_string(points));
  }
}

double simpson_weight(int k, int points) {
  if (k == 0 || k == points - 1) return 1.0;
  return (k % 2 == 1) ? 4.0 : 2.0;
}

}  // namespace

std::string_view to_string(Lineshape shape) {
  return shape == Lineshape::gaussian ? "gaussian" : "rectangular";
}

Lineshape lineshape_from_string(std::string_view name) {
  if (name == "gaussian") return Lineshape::gaussian;
  if (name == "rectangular") return Lineshape::rectangular;
  throw InvalidArgument("unknown lineshape '" + std::string(name) + "'");
}

void LaserSpec::validate() const {
  if (!(center_wavelength_m > 0.0) || !std::isfinite(center_wavelength_m)) {
    throw InvalidArgument("laser center wavelength must be positive");
  }
  if (!(fwhm_m >= 0.0)) throw InvalidArgument("laser FWHM must be non-negative");
  if (!(fwhm_m < center_wavelength_m / 10.0)) {
    throw InvalidArgument("laser FWHM must be below a tenth of the center wavelength");
  }
  if (!(power > 0.0)) throw InvalidArgument("laser power must be positive");
}

LaserSpec LaserSpec::hene() { return LaserSpec{"hene", 633e-9, 1e-12, Lineshape::gaussian, 1.0}; }

LaserSpec LaserSpec::diode() { return LaserSpec{"diode", 633e-9, 40e-9, Lineshape::gaussian, 1.0}; }

LaserSpec LaserSpec::preset(std::string_view name) {
  if (name == "hene") return hene();
  if (name == "diode") return diode();
  throw InvalidArgument("unknown laser preset '" + std::string(name) + "' (expected hene or diode)");
}

SpectralQuadrature SpectralQuadrature::build(const LaserSpec& laser, int points) {
  laser.validate();
  check_quadrature_points(points);

  SpectralQuadrature q;
  if (laser.monochromatic()) {
    q.wavelengths_m = {laser.center_wavelength_m};
    q.weights = {1.0};
    return q;
  }

  const double sigma = laser.fwhm_m / kFwhmPerSigma;
  const double half_width = laser.lineshape == Lineshape::gaussian ? 3.0 * sigma : 0.5 * laser.fwhm_m;
  const double lo = laser.center_wavelength_m - half_width;
  const double h = 2.0 * half_width / (points - 1);

  q.wavelengths_m.resize(points);
  q.weights.resize(points);
  double total = 0.0;
  for (int k = 0; k < points; ++k) {
    const double lambda = lo + k * h;
    double density = 1.0;
    if (laser.lineshape == Lineshape::gaussian) {
      const double z = (lambda - laser.center_wavelength_m) / sigma;
      density = std::exp(-0.5 * z * z);
    }
    q.wavelengths_m[k] = lambda;
    q.weights[k] = simpson_weight(k, points) * density;
    total += q.weights[k];
  }
  for (double& w : q.weights) w /= total;
  return q;
}

void BeamlineConfig::validate() const {
  if (!(splitter_ratio > 0.0 && splitter_ratio < 1.0)) {
    throw InvalidArgument("splitter ratio must lie in (0, 1)");
  }
  if (!(gain1 > 0.0 && gain2 > 0.0)) throw InvalidArgument("detector gains must be positive");
  if (!std::isfinite(dark1) || !std::isfinite(dark2)) throw InvalidArgument("dark offsets must be finite");
}

TransitionResult monochromatic_probabilities(MixingAngle theta, double path_m, double wavelength_m,
                                             double delta_n, double fixed_retardance) {
  const double phase = optical_phase_diff({delta_n, wavelength_m, path_m});
  return transition_probability_closed(theta, phase + fixed_retardance);
}

TransitionResult average_over_spectrum(MixingAngle theta, double path_m, const SpectralQuadrature& quad,
                                       double delta_n, double fixed_retardance) {
  double appear = 0.0;
  double survive = 0.0;
  for (std::size_t k = 0; k < quad.wavelengths_m.size(); ++k) {
    const auto p = monochromatic_probabilities(theta, path_m, quad.wavelengths_m[k], delta_n, fixed_retardance);
    appear += quad.weights[k] * p.p_appear;
    survive += quad.weights[k] * p.p_survive;
  }
  return {std::clamp(appear, 0.0, 1.0), std::clamp(survive, 0.0, 1.0)};
}

TransitionResult spectrum_averaged_probabilities(MixingAngle theta, double path_m, const LaserSpec& laser,
                                                 double delta_n, int quadrature_points,
                                                 double fixed_retardance) {
  const auto quad = SpectralQuadrature::build(laser, quadrature_points);
  return average_over_spectrum(theta, path_m, quad, delta_n, fixed_retardance);
}

double visibility(double path_m, const LaserSpec& laser, double delta_n, int quadrature_points) {
  // Local fringe at L: sweep an extra phase psi0 through one period with the spectral
  // envelope frozen. At 45 degrees p(psi0) = (1 - Re(gamma e^{i psi0})) / 2 with
  // gamma = sum_k w_k exp(i psi_k), so (max - min) / (max + min) = |gamma|.
  const auto quad = SpectralQuadrature::build(laser, quadrature_points);
  std::complex<double> gamma{};
  for (std::size_t k = 0; k < quad.weights.size(); ++k) {
    const double psi = optical_phase_diff({delta_n, quad.wavelengths_m[k], path_m});
    gamma += quad.weights[k] * std::polar(1.0, psi);
  }
  return std::clamp(std::abs(gamma), 0.0, 1.0);
}

DetectorReading detector_readings(const TransitionResult& p, const BeamlineConfig& config) {
  return {config.gain1 * config.splitter_ratio * p.p_survive + config.dark1,
          config.gain2 * (1.0 - config.splitter_ratio) * p.p_appear + config.dark2};
}

TransitionResult normalized_probabilities(const DetectorReading& reading, const BeamlineConfig& config) {
  return {(reading.i2 - config.dark2) / (config.gain2 * (1.0 - config.splitter_ratio)),
          (reading.i1 - config.dark1) / (config.gain1 * config.splitter_ratio)};
}

}  // namespace osclab

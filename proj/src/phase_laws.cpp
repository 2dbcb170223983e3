#include "osclab/phase_laws.hpp"

#include <cmath>
#include <numbers>

#include "osclab/errors.hpp"

namespace osclab {

void NeutrinoParams::validate() const {
  if (!(energy_gev > 0.0) || !std::isfinite(energy_gev)) {
    throw InvalidArgument("neutrino energy must be positive");
  }
  if (!(delta_m2_ev2 > 0.0) || !std::isfinite(delta_m2_ev2)) {
    throw InvalidArgument("mass-squared splitting must be positive");
  }
  if (!(baseline_km >= 0.0) || !std::isfinite(baseline_km)) {
    throw InvalidArgument("baseline must be non-negative");
  }
}

void OpticalParams::validate() const {
  if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m)) {
    throw InvalidArgument("wavelength must be positive");
  }
  if (!(delta_n > 0.0) || !std::isfinite(delta_n)) {
    throw InvalidArgument("index difference must be positive");
  }
  if (!(path_length_m >= 0.0) || !std::isfinite(path_length_m)) {
    throw InvalidArgument("path length must be non-negative");
  }
}

double neutrino_phase_diff(const NeutrinoParams& p, const PhysicalConstants& c) {
  p.validate();
  return 2.0 * c.practical_k() * p.delta_m2_ev2 * p.baseline_km / p.energy_gev;
}

double neutrino_phase_diff_natural(double delta_m2, double energy, double baseline) {
  if (!(energy > 0.0)) throw InvalidArgument("neutrino energy must be positive");
  return delta_m2 * baseline / (2.0 * energy);
}

double optical_phase_diff(const OpticalParams& p) {
  p.validate();
  return 2.0 * std::numbers::pi * p.delta_n * p.path_length_m / p.wavelength_m;
}

double oscillation_length_neutrino(const NeutrinoParams& p, const PhysicalConstants& c) {
  p.validate();
  return std::numbers::pi * p.energy_gev / (c.practical_k() * p.delta_m2_ev2);
}

double oscillation_length_optical(const OpticalParams& p) {
  p.validate();
  return p.wavelength_m / p.delta_n;
}

}  // namespace osclab

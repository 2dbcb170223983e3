#pragma once

// Conversion of physical parameters into the phase difference consumed by
// transition_probability_closed().
//
// Neutrino side uses the ultra-relativistic expansion E_i ~ E + m_i^2 / 2E,
// giving delta_phi = dm^2 L / 2E in natural units. Whether the mass
// eigenstates share energy or momentum does not change this leading-order
// result and is not modeled further.

namespace osclab {

struct PhysicalConstants {
  /// Reduced Planck constant times c, eV*m (CODATA 2018).
  double hbar_c_ev_m = 1.973269804e-7;

  /// K in delta_phi = 2 K dm^2[eV^2] L[km] / E[GeV]; about 1.26693.
  double practical_k() const { return 1.0e3 / (4.0 * 1.0e9 * hbar_c_ev_m); }
};

inline constexpr PhysicalConstants kCodata{};

/// Practical units: eV^2, GeV, km.
struct NeutrinoParams {
  double delta_m2_ev2 = 2.5e-3;
  double energy_gev = 1.0;
  double baseline_km = 0.0;

  void validate() const;
};

/// SI units: dimensionless index difference, meters.
struct OpticalParams {
  double delta_n = 0.057;
  double wavelength_m = 633e-9;
  double path_length_m = 0.0;

  void validate() const;
};

/// 2 K dm^2 L / E.
double neutrino_phase_diff(const NeutrinoParams& p, const PhysicalConstants& c = kCodata);

/// dm^2 L / 2E with hbar = c = 1; any consistent unit system.
double neutrino_phase_diff_natural(double delta_m2, double energy, double baseline);

/// 2 pi dn L / lambda.
double optical_phase_diff(const OpticalParams& p);

/// Baseline (km) over which the phase difference advances by 2 pi: pi E / (K dm^2).
double oscillation_length_neutrino(const NeutrinoParams& p, const PhysicalConstants& c = kCodata);

/// lambda / dn, meters.
double oscillation_length_optical(const OpticalParams& p);

}  // namespace osclab

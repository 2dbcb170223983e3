#pragma once

// Polarizer -> crystal doublet -> beam splitter -> two crossed analyzers.
//
// Detector 1 sits behind the analyzer parallel to the polarizer (survival),
// detector 2 behind the orthogonal one (appearance). A finite laser line is
// handled by averaging intensities over the spectrum; the spread of phases
// across the line lowers the fringe contrast as the path grows.

#include <string>
#include <string_view>
#include <vector>

#include "osclab/osc_core.hpp"

namespace osclab {

enum class Lineshape { gaussian, rectangular };

std::string_view to_string(Lineshape shape);
Lineshape lineshape_from_string(std::string_view name);

/// Lines at or below this width are evaluated at the center wavelength only.
inline constexpr double kMonochromaticFwhm = 1e-12;
inline constexpr int kDefaultQuadraturePoints = 61;

struct LaserSpec {
  std::string name = "hene";
  double center_wavelength_m = 633e-9;
  double fwhm_m = 1e-12;
  Lineshape lineshape = Lineshape::gaussian;
  double power = 1.0;

  void validate() const;
  bool monochromatic() const { return fwhm_m <= kMonochromaticFwhm; }

  static LaserSpec hene();
  /// Broadband multimode pointer, 40 nm FWHM gaussian.
  static LaserSpec diode();
  /// "hene" or "diode"; throws InvalidArgument otherwise.
  static LaserSpec preset(std::string_view name);
};

/// Fixed nodes and normalized weights sampling S(lambda).
///
/// Gaussian lines are integrated over +-3 sigma, rectangular lines over
/// their full support, both with composite Simpson weights.
struct SpectralQuadrature {
  std::vector<double> wavelengths_m;
  std::vector<double> weights;

  static SpectralQuadrature build(const LaserSpec& laser, int points = kDefaultQuadraturePoints);
};

struct BeamlineConfig {
  double splitter_ratio = 0.5;
  double gain1 = 1.0;
  double gain2 = 1.0;
  double dark1 = 0.0;
  double dark2 = 0.0;

  void validate() const;
};

struct DetectorReading {
  double i1 = 0.0;
  double i2 = 0.0;
};

/// Probabilities at one wavelength. `fixed_retardance` is an achromatic phase
/// added to the path-dependent one (the base thickness of the doublet).
TransitionResult monochromatic_probabilities(MixingAngle theta, double path_m, double wavelength_m,
                                             double delta_n, double fixed_retardance = 0.0);

/// Intensity-weighted average over a prebuilt quadrature.
TransitionResult average_over_spectrum(MixingAngle theta, double path_m, const SpectralQuadrature& quad,
                                       double delta_n, double fixed_retardance = 0.0);

/// Spectrum-averaged probabilities. `quadrature_points` must be odd and >= 3.
TransitionResult spectrum_averaged_probabilities(MixingAngle theta, double path_m, const LaserSpec& laser,
                                                 double delta_n,
                                                 int quadrature_points = kDefaultQuadraturePoints,
                                                 double fixed_retardance = 0.0);

/// Fringe contrast (max - min) / (max + min) of the spectrum-averaged
/// appearance probability at theta = 45 deg, taken over one local period at
/// `path_m`: the phase is swept through 2 pi while the spectral envelope stays
/// fixed, so the result does not step as extrema enter and leave a window.
double visibility(double path_m, const LaserSpec& laser, double delta_n,
                  int quadrature_points = kDefaultQuadraturePoints);

/// i1 = g1 r p_survive + d1, i2 = g2 (1 - r) p_appear + d2.
DetectorReading detector_readings(const TransitionResult& p, const BeamlineConfig& config);

/// Inverse of detector_readings: each channel divided by its gain and branch fraction.
TransitionResult normalized_probabilities(const DetectorReading& reading, const BeamlineConfig& config);

}  // namespace osclab

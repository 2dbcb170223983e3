#pragma once

// Data-parallel batch kernels.
//
// Every kernel comes as a pair: `*_serial` is the plain reference loop that
// tests compare against, `*_parallel` distributes the same per-element work
// over OpenMP threads. Elements are computed independently with identical
// arithmetic, so the two variants agree bit for bit, except for the
// max-reduction kernel, whose result is order independent anyway.

#include <numbers>
#include <span>

#include "osclab/beamline.hpp"

namespace osclab::kernels {

/// Spectrum-averaged probabilities at each path length.
void spectrum_curve_serial(MixingAngle theta, std::span<const double> paths_m, const SpectralQuadrature& quad,
                           double delta_n, double fixed_retardance, std::span<TransitionResult> out);
void spectrum_curve_parallel(MixingAngle theta, std::span<const double> paths_m, const SpectralQuadrature& quad,
                             double delta_n, double fixed_retardance, std::span<TransitionResult> out);

/// Uniform grid over theta in [0, pi/2] and delta_phi in [0, phase_max], endpoints included.
struct OracleGrid {
  int theta_points = 100;
  int phase_points = 100;
  double phase_max = 4.0 * std::numbers::pi;
};

/// Largest |chain - closed| over both probabilities on the grid.
double oracle_max_deviation_serial(const OracleGrid& grid);
double oracle_max_deviation_parallel(const OracleGrid& grid);

/// |sum_k y_k exp(-2 pi i f x_k)|^2 for each trial frequency f. `y` should
/// already have its mean removed.
void periodogram_serial(std::span<const double> x, std::span<const double> y, std::span<const double> freqs,
                        std::span<double> power);
void periodogram_parallel(std::span<const double> x, std::span<const double> y, std::span<const double> freqs,
                          std::span<double> power);

}  // namespace osclab::kernels

#include "osclab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>

#include "osclab/errors.hpp"

namespace osclab::kernels {

namespace {

void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw InvalidArgument(std::string(what) + ": input and output sizes differ");
}

double oracle_deviation_at(const OracleGrid& grid, int i, int j) {
  const double theta = (std::numbers::pi / 2) * i / (grid.theta_points - 1);
  const double dphi = grid.phase_max * j / (grid.phase_points - 1);
  const MixingAngle angle(theta);
  const auto chain = transition_probability_chain(angle, {0.0, dphi});
  const auto closed = transition_probability_closed(angle, dphi);
  return std::max(std::abs(chain.p_appear - closed.p_appear), std::abs(chain.p_survive - closed.p_survive));
}

void check_grid(const OracleGrid& grid) {
  if (grid.theta_points < 2 || grid.phase_points < 2) throw InvalidArgument("oracle grid needs >= 2 points per axis");
}

double periodogram_at(std::span<const double> x, std::span<const double> y, double f) {
  double re = 0.0;
  double im = 0.0;
  const double w = -2.0 * std::numbers::pi * f;
  for (std::size_t k = 0; k < x.size(); ++k) {
    re += y[k] * std::cos(w * x[k]);
    im += y[k] * std::sin(w * x[k]);
  }
  return re * re + im * im;
}

}  // namespace

void spectrum_curve_serial(MixingAngle theta, std::span<const double> paths_m, const SpectralQuadrature& quad,
                           double delta_n, double fixed_retardance, std::span<TransitionResult> out) {
  check_same_size(paths_m.size(), out.size(), "spectrum_curve");
  for (std::size_t i = 0; i < paths_m.size(); ++i) {
    out[i] = average_over_spectrum(theta, paths_m[i], quad, delta_n, fixed_retardance);
  }
}

void spectrum_curve_parallel(MixingAngle theta, std::span<const double> paths_m, const SpectralQuadrature& quad,
                             double delta_n, double fixed_retardance, std::span<TransitionResult> out) {
  check_same_size(paths_m.size(), out.size(), "spectrum_curve");
  // Validation throws; do it once outside the parallel region.
  if (!paths_m.empty()) (void)average_over_spectrum(theta, paths_m[0], quad, delta_n, fixed_retardance);
  for (double p : paths_m) {
    if (!(p >= 0.0)) throw InvalidArgument("path length must be non-negative");
  }
  const auto n = static_cast<std::ptrdiff_t>(paths_m.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = average_over_spectrum(theta, paths_m[i], quad, delta_n, fixed_retardance);
  }
}

double oracle_max_deviation_serial(const OracleGrid& grid) {
  check_grid(grid);
  double worst = 0.0;
  for (int i = 0; i < grid.theta_points; ++i) {
    for (int j = 0; j < grid.phase_points; ++j) {
      worst = std::max(worst, oracle_deviation_at(grid, i, j));
    }
  }
  return worst;
}

double oracle_max_deviation_parallel(const OracleGrid& grid) {
  check_grid(grid);
  double worst = 0.0;
#pragma omp parallel for collapse(2) reduction(max : worst) schedule(static)
  for (int i = 0; i < grid.theta_points; ++i) {
    for (int j = 0; j < grid.phase_points; ++j) {
      worst = std::max(worst, oracle_deviation_at(grid, i, j));
    }
  }
  return worst;
}

void periodogram_serial(std::span<const double> x, std::span<const double> y, std::span<const double> freqs,
                        std::span<double> power) {
  check_same_size(x.size(), y.size(), "periodogram");
  check_same_size(freqs.size(), power.size(), "periodogram");
  for (std::size_t i = 0; i < freqs.size(); ++i) power[i] = periodogram_at(x, y, freqs[i]);
}

void periodogram_parallel(std::span<const double> x, std::span<const double> y, std::span<const double> freqs,
                          std::span<double> power) {
  check_same_size(x.size(), y.size(), "periodogram");
  check_same_size(freqs.size(), power.size(), "periodogram");
  const auto n = static_cast<std::ptrdiff_t>(freqs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) power[i] = periodogram_at(x, y, freqs[i]);
}

}  // namespace osclab::kernels

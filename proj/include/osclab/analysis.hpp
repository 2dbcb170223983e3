#pragma once

// Fitting recorded traces to a damped oscillation
//
//   i(dL) = offset + gain * 1/2 sin^2(2 theta) * (1 - V(dL) cos(2 pi dL / lambda_osc + phase0)),
//   V(dL) = exp(-(dL / damping_scale)^2).
//
// Only gain * sin^2(2 theta) is identifiable from one channel, so gain is
// held at its initial value unless FitOptions says otherwise. Traces are fit
// on the normalized appearance channel, for which gain = 1 and offset = 0.

#include <array>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "osclab/daq.hpp"

namespace osclab {

struct FitModel {
  double amplitude_theta_deg = 45.0;
  double lambda_osc_um = 11.105;
  double phase0_rad = 0.0;
  /// Infinity means undamped.
  double damping_scale_um = std::numeric_limits<double>::infinity();
  double gain = 1.0;
  double offset = 0.0;
};

struct FitResult {
  FitModel parameters;
  /// Standard errors in the same units; 0 for parameters held fixed,
  /// infinity where the data do not constrain the parameter.
  FitModel stderr_;
  /// Sum of squared residuals (unit weights).
  double chi2 = 0.0;
  bool converged = false;
  int iterations = 0;
  /// max_c |J_c . r| / (|J_c| |r|) over free parameters at the final point;
  /// 0 when the residual is at rounding level.
  double gradient_norm = 0.0;
  std::string message;
};

struct FitOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
  double gradient_tolerance = 1e-8;
  bool fit_gain = false;
  bool fit_offset = true;
  bool fit_damping = true;
  /// Required trace span in units of the initial oscillation length.
  double min_periods = 1.5;
};

/// Abscissa (delta_L, um) and normalized appearance ordinate extracted from a trace.
struct FitData {
  std::vector<double> delta_L_um;
  std::vector<double> y;
};

FitData appearance_data(const Trace& trace);

double model_intensity(const FitModel& m, double delta_L_um);

/// Internal parameter vector: theta [rad], lambda_osc [um], phase0 [rad],
/// u = 1 / damping_scale^2 [um^-2], gain, offset.
using ParameterVector = std::array<double, 6>;

ParameterVector to_parameters(const FitModel& m);
FitModel from_parameters(const ParameterVector& p);
double model_value(const ParameterVector& p, double x);
/// Analytic partial derivatives of model_value.
ParameterVector model_gradient(const ParameterVector& p, double x);

/// Initial guess: oscillation length from the periodogram peak of the data,
/// amplitude from its range, offset from its minimum. Throws
/// UnidentifiableSignal for a flat trace.
FitModel seed_guess(std::span<const double> x, std::span<const double> y);
FitModel seed_guess(const Trace& trace);

/// Levenberg-Marquardt least squares. Throws PreconditionError if the data
/// span fewer than options.min_periods initial oscillation lengths.
FitResult fit_data(std::span<const double> x, std::span<const double> y, const FitModel& initial,
                   const FitOptions& options = {});
FitResult fit_trace(const Trace& trace, const FitModel& initial, const FitOptions& options = {});

/// Folds theta into [0, 45] deg and phase0 into (-pi, pi].
FitModel canonicalize(FitModel m);

/// {params, stderr, chi2, converged, iterations}
nlohmann::json to_json(const FitResult& r);

}  // namespace osclab

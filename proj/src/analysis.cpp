#include "osclab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "osclab/errors.hpp"
#include "osclab/kernels.hpp"

namespace osclab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kParams = 6;
// Internally the amplitude is A = sin^2(2 theta): the model is linear in A, whereas
// d/dtheta vanishes at 45 degrees and stalls the solver exactly where mixing is maximal.
enum Index { kAmplitude = 0, kLambda, kPhase, kDamping, kGain, kOffset };

constexpr double kMinLambdaUm = 1e-6;
constexpr std::size_t kMaxPeriodogramSamples = 4096;
constexpr std::size_t kMaxTrialFrequencies = 2000;
constexpr int kOversample = 10;
constexpr double kFlatNoiseMultiple = 10.0;
constexpr int kMaxStalledSteps = 5;
// rms residual / rms data below this is indistinguishable from an exact fit
constexpr long double kRoundingFloor = 1e-12L;

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

constexpr ParameterVector kLower{0.0, kMinLambdaUm, -kInf, 0.0, -kInf, -kInf};
constexpr ParameterVector kUpper{1.0, kInf, kInf, kInf, kInf, kInf};

void project(ParameterVector& p) {
  for (int i = 0; i < kParams; ++i) p[i] = std::clamp(p[i], kLower[i], kUpper[i]);
}

// A parameter pinned at a bound whose descent direction (J^T r) points outward is held fixed.
bool held_at_bound(const ParameterVector& p, int i, double descent) {
  return (p[i] <= kLower[i] && descent < 0.0) || (p[i] >= kUpper[i] && descent > 0.0);
}

// Step acceptance compares sums of squares; near the optimum the decrease is
// ~cos^2 * SSR, which double rounding swamps around cos ~ 1e-8. The extended
// precision sum keeps the monotone test meaningful down to the gradient tolerance.
long double sum_squares(std::span<const double> x, std::span<const double> y, const ParameterVector& p) {
  using Ld = long double;
  const Ld a = p[kAmplitude], lam = p[kLambda], ph = p[kPhase], u = p[kDamping], g = p[kGain], off = p[kOffset];
  const Ld two_pi = 2.0L * std::numbers::pi_v<long double>;
  Ld s = 0.0L;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const Ld xk = x[k];
    const Ld model = off + g * 0.5L * a * (1.0L - std::exp(-u * xk * xk) * std::cos(two_pi * xk / lam + ph));
    const Ld r = static_cast<Ld>(y[k]) - model;
    s += r * r;
  }
  return s;
}

void check_data(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("fit data: abscissa and ordinate sizes differ");
  if (x.size() < 2 * kParams) throw PreconditionError("fit data: too few samples");
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || !std::isfinite(y[k])) throw InvalidArgument("fit data contains non-finite values");
  }
}

// Robust noise estimate from second differences of x-sorted data: var(d2) = 6 sigma^2.
double noise_sigma(std::span<const double> x, std::span<const double> y) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> d2;
  d2.reserve(order.size());
  for (std::size_t k = 1; k + 1 < order.size(); ++k) {
    d2.push_back(std::abs(y[order[k + 1]] - 2.0 * y[order[k]] + y[order[k - 1]]));
  }
  return 1.4826 * median(std::move(d2)) / std::sqrt(6.0);
}

}  // namespace

FitData appearance_data(const Trace& trace) {
  const auto& bl = trace.meta.config.beamline;
  FitData d;
  d.delta_L_um.reserve(trace.samples.size());
  d.y.reserve(trace.samples.size());
  for (const auto& s : trace.samples) {
    d.delta_L_um.push_back(s.delta_L_um);
    d.y.push_back(normalized_probabilities({s.i1, s.i2}, bl).p_appear);
  }
  return d;
}

ParameterVector to_parameters(const FitModel& m) {
  const double u = std::isinf(m.damping_scale_um) ? 0.0 : 1.0 / (m.damping_scale_um * m.damping_scale_um);
  const double s = std::sin(2.0 * m.amplitude_theta_deg * kPi / 180.0);
  return {s * s, m.lambda_osc_um, m.phase0_rad, u, m.gain, m.offset};
}

FitModel from_parameters(const ParameterVector& p) {
  return {0.5 * std::asin(std::sqrt(std::clamp(p[kAmplitude], 0.0, 1.0))) * 180.0 / kPi,
          p[kLambda],
          p[kPhase],
          p[kDamping] > 0.0 ? 1.0 / std::sqrt(p[kDamping]) : kInf,
          p[kGain],
          p[kOffset]};
}

double model_value(const ParameterVector& p, double x) {
  const double v = std::exp(-p[kDamping] * x * x);
  const double psi = 2.0 * kPi * x / p[kLambda] + p[kPhase];
  return p[kOffset] + p[kGain] * 0.5 * p[kAmplitude] * (1.0 - v * std::cos(psi));
}

ParameterVector model_gradient(const ParameterVector& p, double x) {
  const double half_amp = 0.5 * p[kAmplitude];
  const double v = std::exp(-p[kDamping] * x * x);
  const double psi = 2.0 * kPi * x / p[kLambda] + p[kPhase];
  const double c = std::cos(psi);
  const double sn = std::sin(psi);
  const double g = p[kGain];
  ParameterVector d{};
  d[kAmplitude] = g * 0.5 * (1.0 - v * c);
  d[kLambda] = g * half_amp * v * sn * (-2.0 * kPi * x / (p[kLambda] * p[kLambda]));
  d[kPhase] = g * half_amp * v * sn;
  d[kDamping] = g * half_amp * x * x * v * c;
  d[kGain] = half_amp * (1.0 - v * c);
  d[kOffset] = 1.0;
  return d;
}

double model_intensity(const FitModel& m, double delta_L_um) { return model_value(to_parameters(m), delta_L_um); }

FitModel canonicalize(FitModel m) {
  double t = std::fmod(m.amplitude_theta_deg, 90.0);
  if (t < 0.0) t += 90.0;
  if (t > 45.0) t = 90.0 - t;
  m.amplitude_theta_deg = t;
  double ph = std::remainder(m.phase0_rad, 2.0 * kPi);
  if (ph <= -kPi) ph += 2.0 * kPi;
  m.phase0_rad = ph;
  return m;
}

FitModel seed_guess(std::span<const double> x, std::span<const double> y) {
  check_data(x, y);
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  const double span = *xmax_it - *xmin_it;
  const double range = *ymax_it - *ymin_it;
  if (!(span > 0.0)) throw PreconditionError("trace does not move: zero path span");

  const double sigma = noise_sigma(x, y);
  if (range < std::max(kFlatNoiseMultiple * sigma, 1e-9)) {
    throw UnidentifiableSignal("flat trace: oscillation amplitude is below the noise floor (theta ~ 0)");
  }

  // Decimate long traces; the periodogram only needs to resolve the peak.
  const std::size_t stride = (x.size() + kMaxPeriodogramSamples - 1) / kMaxPeriodogramSamples;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < x.size(); k += stride) {
    xs.push_back(x[k]);
    ys.push_back(y[k]);
  }
  const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  for (double& v : ys) v -= mean;

  const double f_min = 1.0 / span;
  const double df = f_min / kOversample;
  const double f_nyquist = 0.5 * static_cast<double>(xs.size()) / span;
  const auto n_freq = std::min<std::size_t>(
      kMaxTrialFrequencies, static_cast<std::size_t>(std::max(1.0, (f_nyquist - f_min) / df + 1.0)));
  std::vector<double> freqs(n_freq);
  for (std::size_t i = 0; i < n_freq; ++i) freqs[i] = f_min + static_cast<double>(i) * df;
  std::vector<double> power(n_freq);
  kernels::periodogram_parallel(xs, ys, freqs, power);

  // Strict comparison in ascending frequency keeps the longer period on ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < n_freq; ++i) {
    if (power[i] > power[best]) best = i;
  }
  double f_peak = freqs[best];
  if (best > 0 && best + 1 < n_freq) {
    const double a = power[best - 1], b = power[best], c = power[best + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) f_peak += 0.5 * df * (a - c) / denom;
  }

  std::complex<double> dft{};
  for (std::size_t k = 0; k < xs.size(); ++k) dft += ys[k] * std::polar(1.0, -2.0 * kPi * f_peak * xs[k]);

  FitModel m;
  m.gain = 1.0;
  m.lambda_osc_um = 1.0 / f_peak;
  m.phase0_rad = std::arg(-dft);
  m.offset = *ymin_it;
  const double s2 = std::clamp(range / m.gain, 0.0, 1.0);
  m.amplitude_theta_deg = 0.5 * std::asin(std::sqrt(s2)) * 180.0 / kPi;
  m.damping_scale_um = kInf;
  return m;
}

FitModel seed_guess(const Trace& trace) {
  const auto d = appearance_data(trace);
  return seed_guess(d.delta_L_um, d.y);
}

FitResult fit_data(std::span<const double> x, std::span<const double> y, const FitModel& initial,
                   const FitOptions& options) {
  check_data(x, y);
  if (!(initial.lambda_osc_um > 0.0)) throw InvalidArgument("initial oscillation length must be positive");
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double periods = (*xmax_it - *xmin_it) / initial.lambda_osc_um;
  if (periods < options.min_periods) {
    throw PreconditionError("trace spans " + std::to_string(periods) + " oscillation lengths; at least " +
                            std::to_string(options.min_periods) + " are required");
  }

  std::array<bool, kParams> free{true, true, true, options.fit_damping, options.fit_gain, options.fit_offset};
  std::vector<int> cols;
  for (int i = 0; i < kParams; ++i) {
    if (free[i]) cols.push_back(i);
  }
  const auto nf = static_cast<Eigen::Index>(cols.size());
  const auto n = static_cast<Eigen::Index>(x.size());

  ParameterVector p = to_parameters(initial);
  project(p);

  Eigen::MatrixXd jac(n, nf);
  Eigen::VectorXd resid(n);
  auto linearize = [&](const ParameterVector& at) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto g = model_gradient(at, x[k]);
      for (Eigen::Index c = 0; c < nf; ++c) jac(k, c) = g[cols[c]];
      resid(k) = y[k] - model_value(at, x[k]);
    }
  };

  FitResult result;
  long double ssr = sum_squares(x, y, p);
  double mu = 1e-3;
  Eigen::MatrixXd normal(nf, nf);
  Eigen::VectorXd grad(nf);

  // Scale-free gradient: the largest cosine between the residual and a Jacobian
  // column (MINPACK's gtol test), so parameter units do not set the bar.
  // Components held at a bound do not count.
  // A residual at rounding level has no direction left to measure; treat it
  // like an exact zero.
  long double data_ss = 0.0L;
  for (double v : y) data_ss += static_cast<long double>(v) * v;
  const long double floor_ss = kRoundingFloor * kRoundingFloor * data_ss;
  std::vector<bool> held(cols.size(), false);
  auto free_gradient = [&](Eigen::VectorXd& g) {
    const double rnorm = ssr <= floor_ss ? 0.0 : resid.norm();
    double worst = 0.0;
    for (Eigen::Index c = 0; c < nf; ++c) {
      held[c] = held_at_bound(p, cols[c], g(c));
      if (held[c]) g(c) = 0.0;
      const double cnorm = jac.col(c).norm();
      if (rnorm > 0.0 && cnorm > 0.0) worst = std::max(worst, std::abs(g(c)) / (cnorm * rnorm));
    }
    return worst;
  };

  int iter = 0;
  int stalled = 0;
  bool done = false;
  for (; iter < options.max_iterations && !done; ++iter) {
    linearize(p);
    normal = jac.transpose() * jac;
    grad = jac.transpose() * resid;
    if (free_gradient(grad) < options.gradient_tolerance) {
      result.converged = true;
      result.message = ssr <= floor_ss ? "residual at rounding level" : "gradient below tolerance";
      break;
    }

    const double diag_floor = 1e-12 * std::max(1.0, normal.diagonal().maxCoeff());
    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = normal;
      for (Eigen::Index c = 0; c < nf; ++c) damped(c, c) += mu * std::max(normal(c, c), diag_floor);
      for (Eigen::Index c = 0; c < nf; ++c) {
        if (held[c]) {
          damped.row(c).setZero();
          damped.col(c).setZero();
          damped(c, c) = 1.0;
        }
      }
      const Eigen::VectorXd delta = damped.ldlt().solve(grad);

      ParameterVector trial = p;
      for (Eigen::Index c = 0; c < nf; ++c) trial[cols[c]] += delta(c);
      project(trial);
      const long double trial_ssr = delta.allFinite() ? sum_squares(x, y, trial) : static_cast<long double>(kInf);

      if (trial_ssr <= ssr) {
        const auto rel = static_cast<double>(ssr > 0.0L ? (ssr - trial_ssr) / ssr : 0.0L);
        p = trial;
        ssr = trial_ssr;
        mu = std::max(mu / 10.0, 1e-15);
        accepted = true;
        // A stalled residual only counts as convergence once the gradient agrees
        // (checked at the top of the next iteration); repeated stalls end the fit.
        stalled = rel < options.relative_tolerance ? stalled + 1 : 0;
        if (stalled >= kMaxStalledSteps) {
          result.message = "residual stalled but gradient above tolerance";
          done = true;
        }
      } else {
        mu *= 10.0;
        if (mu > 1e20) {
          result.message = "step size collapsed without reducing the residual";
          done = true;
          break;
        }
      }
    }
  }
  if (!result.converged && result.message.empty()) {
    result.message = "no convergence after " + std::to_string(options.max_iterations) + " iterations";
  }

  // Final linearization for the reported gradient and covariance.
  linearize(p);
  normal = jac.transpose() * jac;
  grad = jac.transpose() * resid;
  result.gradient_norm = nf > 0 ? free_gradient(grad) : 0.0;
  result.iterations = iter;
  result.chi2 = static_cast<double>(ssr);

  ParameterVector err{};
  const double dof = static_cast<double>(n - nf);
  const double s2 = dof > 0 ? static_cast<double>(ssr) / dof : kInf;
  // Equilibrate columns so the rank cutoff is not driven by parameter units.
  Eigen::VectorXd scale = normal.diagonal().cwiseSqrt();
  for (Eigen::Index c = 0; c < nf; ++c) {
    if (!(scale(c) > 0.0)) scale(c) = 1.0;
  }
  const Eigen::MatrixXd scaled = scale.cwiseInverse().asDiagonal() * normal * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-12 * (sv.size() ? sv(0) : 0.0);
  for (Eigen::Index c = 0; c < nf; ++c) {
    double var = 0.0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      const double v = svd.matrixV()(c, k);
      if (sv(k) <= cutoff) {
        if (std::abs(v) > 1e-6) var = kInf;
      } else if (std::isfinite(var)) {
        var += v * v / sv(k);
      }
    }
    err[cols[c]] = std::sqrt(s2 * var) / scale(c);
  }

  FitModel fitted = from_parameters(p);
  FitModel sigma{};
  // theta = asin(sqrt(A)) / 2  =>  dtheta/dA = 1 / (4 sqrt(A (1 - A)))
  const double a = p[kAmplitude];
  sigma.amplitude_theta_deg =
      (a > 0.0 && a < 1.0 ? err[kAmplitude] / (4.0 * std::sqrt(a * (1.0 - a))) : kInf) * 180.0 / kPi;
  sigma.lambda_osc_um = err[kLambda];
  sigma.phase0_rad = err[kPhase];
  // d = u^{-1/2}  =>  sigma_d = sigma_u / (2 u^{3/2})
  sigma.damping_scale_um = p[kDamping] > 0.0 ? err[kDamping] / (2.0 * std::pow(p[kDamping], 1.5))
                                             : (free[kDamping] ? kInf : 0.0);
  sigma.gain = err[kGain];
  sigma.offset = err[kOffset];

  result.parameters = canonicalize(fitted);
  result.stderr_ = sigma;
  return result;
}

FitResult fit_trace(const Trace& trace, const FitModel& initial, const FitOptions& options) {
  const auto d = appearance_data(trace);
  return fit_data(d.delta_L_um, d.y, initial, options);
}

nlohmann::json to_json(const FitResult& r) {
  auto model_json = [](const FitModel& m) {
    nlohmann::json j;
    j["amplitude_theta_deg"] = m.amplitude_theta_deg;
    j["lambda_osc_um"] = m.lambda_osc_um;
    j["phase0_rad"] = m.phase0_rad;
    // JSON has no infinity; null stands for "unbounded".
    j["damping_scale_um"] = std::isfinite(m.damping_scale_um) ? nlohmann::json(m.damping_scale_um) : nlohmann::json();
    j["gain"] = m.gain;
    j["offset"] = m.offset;
    return j;
  };
  auto stderr_json = model_json(r.stderr_);
  for (auto& [key, value] : stderr_json.items()) {
    if (value.is_number_float() && !std::isfinite(value.get<double>())) value = nullptr;
  }
  return {{"params", model_json(r.parameters)},
          {"stderr", stderr_json},
          {"chi2", r.chi2},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"gradient_norm", r.gradient_norm},
          {"message", r.message}};
}

}  // namespace osclab

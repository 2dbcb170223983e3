#include "osclab/daq.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "osclab/errors.hpp"
#include "osclab/kernels.hpp"

namespace osclab {

namespace {

// Guards the sample count against 5.5 / 0.55 * 10 = 100.00000000000001.
constexpr double kCountSlack = 1e-9;

double wedge_factor(const CrystalDoublet& c) { return 2.0 * std::tan(c.wedge_angle_deg * std::numbers::pi / 180.0); }

// SplitMix64 finalizer; decorrelates consecutive scan seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

void ScanPlan::validate() const {
  if (!std::isfinite(s_start_mm) || !std::isfinite(s_end_mm)) throw InvalidArgument("scan endpoints must be finite");
  if (s_start_mm == s_end_mm) throw InvalidArgument("scan start and end must differ");
  if (!(speed_mm_s > 0.0) || !std::isfinite(speed_mm_s)) throw InvalidArgument("scan speed must be positive");
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw InvalidArgument("sample rate must be positive");
  }
}

double ScanPlan::duration_s() const { return std::abs(s_end_mm - s_start_mm) / speed_mm_s; }

std::size_t ScanPlan::sample_count() const {
  return static_cast<std::size_t>(std::ceil(duration_s() * sample_rate_hz - kCountSlack)) + 1;
}

void NoiseModel::validate() const {
  if (!(sigma_intensity >= 0.0) || !(sigma_position_mm >= 0.0)) {
    throw InvalidArgument("noise sigmas must be non-negative");
  }
}

void DaqConfig::validate() const {
  crystal.validate();
  beamline.validate();
  laser.validate();
  noise.validate();
  if (quadrature_points < 3 || quadrature_points % 2 == 0) {
    throw InvalidArgument("quadrature_points must be odd and >= 3");
  }
}

Daq::Daq(DaqConfig config)
    : config_(std::move(config)), quadrature_(SpectralQuadrature::build(config_.laser, config_.quadrature_points)) {
  config_.validate();
  rng_.seed(config_.noise.seed);
  trace_.meta.config = config_;
}

std::optional<ScanPlan> Daq::active_plan() const {
  return session_ == Session::scan ? plan_ : std::nullopt;
}

Clamped<double> Daq::set_position(double position_mm) {
  if (session_ == Session::scan) throw PreconditionError("a scan is running and owns the manipulator");
  const auto state = make_rig_state(position_mm, rig_.table_rotation_deg, config_.crystal);
  rig_.position_mm = state.value.position_mm;
  return {rig_.position_mm, state.clamped};
}

Clamped<double> Daq::set_rotation(double rotation_deg) {
  const auto state = make_rig_state(rig_.position_mm, rotation_deg, config_.crystal);
  rig_.table_rotation_deg = state.value.table_rotation_deg;
  return {rig_.table_rotation_deg, state.clamped};
}

void Daq::set_laser(const LaserSpec& laser) {
  auto quad = SpectralQuadrature::build(laser, config_.quadrature_points);
  config_.laser = laser;
  quadrature_ = std::move(quad);
}

void Daq::begin_manual() {
  session_ = Session::manual;
  plan_.reset();
  elapsed_s_ = 0.0;
}

void Daq::begin_scan(const ScanPlan& plan) {
  plan.validate();
  session_ = Session::scan;
  plan_ = plan;
  elapsed_s_ = 0.0;
  reseed_for_scan();
  trace_ = Trace{};
  trace_.meta.config = config_;
  trace_.meta.table_rotation_deg = rig_.table_rotation_deg;
  trace_.meta.plan = plan;
  trace_.samples.reserve(plan.sample_count());
}

void Daq::stop() {
  if (session_ == Session::idle) return;
  session_ = Session::idle;
  plan_.reset();
}

void Daq::reseed_for_scan() {
  rng_.seed(mix_seed(config_.noise.seed, scan_index_++));
  gauss_.reset();
}

double Daq::planned_position(double elapsed_s) const {
  const double span = std::abs(plan_->s_end_mm - plan_->s_start_mm);
  const double direction = plan_->s_end_mm > plan_->s_start_mm ? 1.0 : -1.0;
  const double travelled = std::min(plan_->speed_mm_s * elapsed_s, span);
  return std::clamp(plan_->s_start_mm + direction * travelled, 0.0, config_.crystal.travel_range_mm);
}

double Daq::fixed_retardance() const {
  return 2.0 * std::numbers::pi * config_.crystal.birefringence() * config_.crystal.base_thickness_mm * 1e-3 /
         config_.laser.center_wavelength_m;
}

Sample Daq::make_sample(const TransitionResult& p) {
  const auto reading = detector_readings(p, config_.beamline);
  Sample s;
  s.t_s = elapsed_s_;
  s.position_mm = rig_.position_mm + config_.noise.sigma_position_mm * gauss_(rng_);
  s.delta_L_um = wedge_factor(config_.crystal) * s.position_mm * 1e3;
  s.theta_deg = mixing_angle(rig_).degrees();
  s.i1 = reading.i1 + config_.noise.sigma_intensity * gauss_(rng_);
  s.i2 = reading.i2 + config_.noise.sigma_intensity * gauss_(rng_);
  return s;
}

Sample Daq::step(double dt_s) {
  if (session_ == Session::idle) throw NoActiveSession();
  if (!(dt_s >= 0.0)) throw InvalidArgument("step dt must be non-negative");
  elapsed_s_ += dt_s;
  const bool scanning = session_ == Session::scan;
  if (scanning) rig_.position_mm = planned_position(elapsed_s_);

  const double path = path_length_change(rig_, config_.crystal).value;
  const auto p = average_over_spectrum(mixing_angle(rig_), path, quadrature_, config_.crystal.birefringence(),
                                       fixed_retardance());
  const Sample s = make_sample(p);

  if (scanning) {
    trace_.samples.push_back(s);
    trace_.meta.t_end_s = s.t_s;
    if (plan_->speed_mm_s * elapsed_s_ >= std::abs(plan_->s_end_mm - plan_->s_start_mm) - kCountSlack) {
      session_ = Session::manual;
      plan_.reset();
      elapsed_s_ = 0.0;
    }
  }
  return s;
}

Trace Daq::run_scan(const ScanPlan& plan) {
  begin_scan(plan);
  const std::size_t n = plan.sample_count();

  std::vector<double> times(n);
  std::vector<double> positions(n);
  std::vector<double> paths(n);
  for (std::size_t k = 0; k < n; ++k) {
    times[k] = static_cast<double>(k) / plan.sample_rate_hz;
    positions[k] = planned_position(times[k]);
    paths[k] = path_length_change({positions[k], rig_.table_rotation_deg}, config_.crystal).value;
  }

  std::vector<TransitionResult> probabilities(n);
  kernels::spectrum_curve_parallel(mixing_angle(rig_), paths, quadrature_, config_.crystal.birefringence(),
                                   fixed_retardance(), probabilities);

  // Noise is drawn serially so the trace does not depend on the thread count.
  for (std::size_t k = 0; k < n; ++k) {
    elapsed_s_ = times[k];
    rig_.position_mm = positions[k];
    trace_.samples.push_back(make_sample(probabilities[k]));
  }
  trace_.meta.t_start_s = trace_.samples.front().t_s;
  trace_.meta.t_end_s = trace_.samples.back().t_s;
  session_ = Session::manual;
  plan_.reset();
  elapsed_s_ = 0.0;
  return trace_;
}

}  // namespace osclab

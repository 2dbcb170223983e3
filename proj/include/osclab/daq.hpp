#pragma once

// Virtual data-acquisition chain: manipulator, potentiometer readout and the
// two photodiodes, driven by a virtual clock.
//
// A Daq instance owns the rig state. It may be moved between threads but
// must only be driven by one at a time; the service wraps it in a single
// simulation thread and a command queue.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "osclab/beamline.hpp"
#include "osclab/crystal_rig.hpp"

namespace osclab {

struct Sample {
  double t_s = 0.0;
  double position_mm = 0.0;
  /// Path change relative to s = 0, micrometers.
  double delta_L_um = 0.0;
  double theta_deg = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;

  bool operator==(const Sample&) const = default;
};

struct ScanPlan {
  double s_start_mm = 0.0;
  double s_end_mm = 5.5;
  double speed_mm_s = 0.55;
  double sample_rate_hz = 10.0;

  void validate() const;
  double duration_s() const;
  /// ceil(|s_end - s_start| / speed * rate) + 1
  std::size_t sample_count() const;

  bool operator==(const ScanPlan&) const = default;
};

struct NoiseModel {
  double sigma_intensity = 0.005;
  double sigma_position_mm = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
  static NoiseModel noiseless(std::uint64_t seed = 0) { return {0.0, 0.0, seed}; }

  bool operator==(const NoiseModel&) const = default;
};

struct DaqConfig {
  CrystalDoublet crystal;
  BeamlineConfig beamline;
  LaserSpec laser = LaserSpec::hene();
  NoiseModel noise;
  int quadrature_points = kDefaultQuadraturePoints;

  void validate() const;
};

struct TraceMetadata {
  DaqConfig config;
  double table_rotation_deg = 0.0;
  std::optional<ScanPlan> plan;
  /// Virtual-clock times of the first and last sample.
  double t_start_s = 0.0;
  double t_end_s = 0.0;
};

struct Trace {
  TraceMetadata meta;
  std::vector<Sample> samples;
};

enum class Session { idle, manual, scan };

class Daq {
 public:
  explicit Daq(DaqConfig config);

  const DaqConfig& config() const { return config_; }
  const RigState& rig() const { return rig_; }
  Session session() const { return session_; }
  /// Seconds since the current session started.
  double clock_s() const { return elapsed_s_; }
  /// Samples of the current or most recent scan.
  const Trace& trace() const { return trace_; }
  std::optional<ScanPlan> active_plan() const;

  /// Moves the manipulator; rejected with PreconditionError while a scan owns it.
  Clamped<double> set_position(double position_mm);
  Clamped<double> set_rotation(double rotation_deg);
  void set_laser(const LaserSpec& laser);

  void begin_manual();
  void begin_scan(const ScanPlan& plan);
  /// Ends a scan (keeping its partial trace) or a manual session.
  void stop();

  /// Advances the virtual clock by dt and returns one sample. In a scan the
  /// manipulator follows the plan and stops at its end point; the session
  /// then falls back to manual. Throws NoActiveSession when idle.
  Sample step(double dt_s);

  /// Runs a complete scan from the current state and returns its trace.
  Trace run_scan(const ScanPlan& plan);

 private:
  double planned_position(double elapsed_s) const;
  double fixed_retardance() const;
  Sample make_sample(const TransitionResult& p);
  void reseed_for_scan();

  DaqConfig config_;
  SpectralQuadrature quadrature_;
  RigState rig_;
  Session session_ = Session::idle;
  std::optional<ScanPlan> plan_;
  double elapsed_s_ = 0.0;
  std::uint64_t scan_index_ = 0;
  Trace trace_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace osclab

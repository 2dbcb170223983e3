#pragma once

// Lab configuration file (YAML). Every section and key is optional; unknown
// keys are rejected. Defaults describe the wedge-doublet bench:
//
//   crystal:
//     wedge_angle_deg: 0.2
//     travel_range_mm: 5.5
//     base_thickness_mm: 10.0
//     n_ord: 1.552
//     n_extra: 1.609
//   potentiometer:
//     v0: 0.0
//     slope_v_per_mm: 1.0
//   beamline:
//     splitter_ratio: 0.5
//     gain1: 1.0
//     gain2: 1.0
//     dark1: 0.0
//     dark2: 0.0
//   laser:
//     preset: hene            # active preset at start-up
//     hene:  { center_wavelength_m: 633e-9, fwhm_m: 1e-12, lineshape: gaussian, power: 1.0 }
//     diode: { center_wavelength_m: 633e-9, fwhm_m: 40e-9, lineshape: gaussian, power: 1.0 }
//   noise:
//     sigma_intensity: 0.005
//     sigma_position_mm: 0.01
//     seed: 0
//   quadrature_points: 61
//   service:
//     host: 127.0.0.1
//     port: 8080
//     live_rate_hz: 20        # sampling rate outside scans

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "osclab/daq.hpp"

namespace osclab {

struct ServiceSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  double live_rate_hz = 20.0;
};

struct LabConfig {
  CrystalDoublet crystal;
  PotentiometerCalibration potentiometer;
  BeamlineConfig beamline;
  std::string active_laser = "hene";
  std::map<std::string, LaserSpec, std::less<>> lasers{{"hene", LaserSpec::hene()},
                                                       {"diode", LaserSpec::diode()}};
  NoiseModel noise;
  int quadrature_points = kDefaultQuadraturePoints;
  ServiceSettings service;

  /// Checks every sub-invariant; throws InvalidArgument.
  void validate() const;

  /// Named preset as configured; throws InvalidArgument for unknown names.
  const LaserSpec& laser(std::string_view name) const;
  DaqConfig daq_config() const;
};

/// Throws ParseError (with line) for malformed YAML or unknown keys and
/// InvalidArgument for values that break an invariant.
LabConfig parse_config(std::string_view yaml_text);
LabConfig load_config(const std::filesystem::path& path);

}  // namespace osclab

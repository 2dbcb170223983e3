#include "osclab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "osclab/errors.hpp"

namespace osclab {

namespace {

std::size_t line_of(const YAML::Node& n) { return static_cast<std::size_t>(n.Mark().line) + 1; }

void check_keys(const YAML::Node& node, std::initializer_list<std::string_view> allowed, std::string_view section) {
  if (!node.IsMap()) throw ParseError(line_of(node), "'" + std::string(section) + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(line_of(kv.first), "unknown key '" + key + "' in " + std::string(section));
    }
  }
}

template <class T>
void read(const YAML::Node& parent, const char* key, T& out) {
  const auto n = parent[key];
  if (!n) return;
  try {
    out = n.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(line_of(n), std::string("'") + key + "' has an invalid value");
  }
}

void read_laser(const YAML::Node& node, LaserSpec& laser, std::string_view name) {
  check_keys(node, {"center_wavelength_m", "fwhm_m", "lineshape", "power"}, "laser." + std::string(name));
  read(node, "center_wavelength_m", laser.center_wavelength_m);
  read(node, "fwhm_m", laser.fwhm_m);
  std::string shape(to_string(laser.lineshape));
  read(node, "lineshape", shape);
  try {
    laser.lineshape = lineshape_from_string(shape);
  } catch (const InvalidArgument& e) {
    throw ParseError(line_of(node), e.what());
  }
  read(node, "power", laser.power);
}

}  // namespace

void LabConfig::validate() const {
  crystal.validate();
  beamline.validate();
  noise.validate();
  if (potentiometer.slope_v_per_mm == 0.0) throw InvalidArgument("potentiometer slope must be non-zero");
  for (const auto& [name, spec] : lasers) spec.validate();
  (void)laser(active_laser);
  if (quadrature_points < 3 || quadrature_points % 2 == 0) {
    throw InvalidArgument("quadrature_points must be odd and >= 3");
  }
  if (service.port < 0 || service.port > 65535) throw InvalidArgument("service port out of range");
  if (!(service.live_rate_hz > 0.0)) throw InvalidArgument("live_rate_hz must be positive");
}

const LaserSpec& LabConfig::laser(std::string_view name) const {
  const auto it = lasers.find(name);
  if (it == lasers.end()) throw InvalidArgument("unknown laser preset '" + std::string(name) + "'");
  return it->second;
}

DaqConfig LabConfig::daq_config() const {
  DaqConfig c;
  c.crystal = crystal;
  c.beamline = beamline;
  c.laser = laser(active_laser);
  c.noise = noise;
  c.quadrature_points = quadrature_points;
  return c;
}

LabConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(static_cast<std::size_t>(e.mark.line) + 1, e.msg);
  }

  LabConfig cfg;
  if (!root || root.IsNull()) return cfg;
  check_keys(root,
             {"crystal", "potentiometer", "beamline", "laser", "noise", "quadrature_points", "service"},
             "config");

  if (const auto n = root["crystal"]) {
    check_keys(n, {"wedge_angle_deg", "travel_range_mm", "base_thickness_mm", "n_ord", "n_extra"}, "crystal");
    read(n, "wedge_angle_deg", cfg.crystal.wedge_angle_deg);
    read(n, "travel_range_mm", cfg.crystal.travel_range_mm);
    read(n, "base_thickness_mm", cfg.crystal.base_thickness_mm);
    read(n, "n_ord", cfg.crystal.n_ord);
    read(n, "n_extra", cfg.crystal.n_extra);
  }
  if (const auto n = root["potentiometer"]) {
    check_keys(n, {"v0", "slope_v_per_mm"}, "potentiometer");
    read(n, "v0", cfg.potentiometer.v0);
    read(n, "slope_v_per_mm", cfg.potentiometer.slope_v_per_mm);
  }
  if (const auto n = root["beamline"]) {
    check_keys(n, {"splitter_ratio", "gain1", "gain2", "dark1", "dark2"}, "beamline");
    read(n, "splitter_ratio", cfg.beamline.splitter_ratio);
    read(n, "gain1", cfg.beamline.gain1);
    read(n, "gain2", cfg.beamline.gain2);
    read(n, "dark1", cfg.beamline.dark1);
    read(n, "dark2", cfg.beamline.dark2);
  }
  if (const auto n = root["laser"]) {
    check_keys(n, {"preset", "hene", "diode"}, "laser");
    read(n, "preset", cfg.active_laser);
    for (const char* name : {"hene", "diode"}) {
      if (const auto p = n[name]) read_laser(p, cfg.lasers.at(name), name);
    }
  }
  if (const auto n = root["noise"]) {
    check_keys(n, {"sigma_intensity", "sigma_position_mm", "seed"}, "noise");
    read(n, "sigma_intensity", cfg.noise.sigma_intensity);
    read(n, "sigma_position_mm", cfg.noise.sigma_position_mm);
    read(n, "seed", cfg.noise.seed);
  }
  read(root, "quadrature_points", cfg.quadrature_points);
  if (const auto n = root["service"]) {
    check_keys(n, {"host", "port", "live_rate_hz"}, "service");
    read(n, "host", cfg.service.host);
    read(n, "port", cfg.service.port);
    read(n, "live_rate_hz", cfg.service.live_rate_hz);
  }

  cfg.validate();
  return cfg;
}

LabConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace osclab

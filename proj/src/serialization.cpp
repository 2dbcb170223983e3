#include "osclab/serialization.hpp"

#include <algorithm>
#include <string>

#include "osclab/errors.hpp"

namespace osclab {

namespace {

template <class T>
void read_opt(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument(std::string("field '") + key + "' has the wrong type");
    }
  }
}

}  // namespace

void require_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidArgument("unknown key '" + key + "' in " + std::string(what));
    }
  }
}

void to_json(Json& j, const LaserSpec& v) {
  j = Json{{"name", v.name},
           {"center_wavelength_m", v.center_wavelength_m},
           {"fwhm_m", v.fwhm_m},
           {"lineshape", std::string(to_string(v.lineshape))},
           {"power", v.power}};
}

void from_json(const Json& j, LaserSpec& v) {
  require_keys(j, {"name", "center_wavelength_m", "fwhm_m", "lineshape", "power"}, "laser");
  read_opt(j, "name", v.name);
  read_opt(j, "center_wavelength_m", v.center_wavelength_m);
  read_opt(j, "fwhm_m", v.fwhm_m);
  std::string shape(to_string(v.lineshape));
  read_opt(j, "lineshape", shape);
  v.lineshape = lineshape_from_string(shape);
  read_opt(j, "power", v.power);
}

void to_json(Json& j, const CrystalDoublet& v) {
  j = Json{{"wedge_angle_deg", v.wedge_angle_deg},
           {"travel_range_mm", v.travel_range_mm},
           {"base_thickness_mm", v.base_thickness_mm},
           {"n_ord", v.n_ord},
           {"n_extra", v.n_extra}};
}

void from_json(const Json& j, CrystalDoublet& v) {
  require_keys(j, {"wedge_angle_deg", "travel_range_mm", "base_thickness_mm", "n_ord", "n_extra"}, "crystal");
  read_opt(j, "wedge_angle_deg", v.wedge_angle_deg);
  read_opt(j, "travel_range_mm", v.travel_range_mm);
  read_opt(j, "base_thickness_mm", v.base_thickness_mm);
  read_opt(j, "n_ord", v.n_ord);
  read_opt(j, "n_extra", v.n_extra);
}

void to_json(Json& j, const BeamlineConfig& v) {
  j = Json{{"splitter_ratio", v.splitter_ratio}, {"gain1", v.gain1}, {"gain2", v.gain2},
           {"dark1", v.dark1},                   {"dark2", v.dark2}};
}

void from_json(const Json& j, BeamlineConfig& v) {
  require_keys(j, {"splitter_ratio", "gain1", "gain2", "dark1", "dark2"}, "beamline");
  read_opt(j, "splitter_ratio", v.splitter_ratio);
  read_opt(j, "gain1", v.gain1);
  read_opt(j, "gain2", v.gain2);
  read_opt(j, "dark1", v.dark1);
  read_opt(j, "dark2", v.dark2);
}

void to_json(Json& j, const NoiseModel& v) {
  j = Json{{"sigma_intensity", v.sigma_intensity}, {"sigma_position_mm", v.sigma_position_mm}, {"seed", v.seed}};
}

void from_json(const Json& j, NoiseModel& v) {
  require_keys(j, {"sigma_intensity", "sigma_position_mm", "seed"}, "noise");
  read_opt(j, "sigma_intensity", v.sigma_intensity);
  read_opt(j, "sigma_position_mm", v.sigma_position_mm);
  read_opt(j, "seed", v.seed);
}

void to_json(Json& j, const ScanPlan& v) {
  j = Json{{"s_start_mm", v.s_start_mm},
           {"s_end_mm", v.s_end_mm},
           {"speed_mm_s", v.speed_mm_s},
           {"sample_rate_hz", v.sample_rate_hz}};
}

void from_json(const Json& j, ScanPlan& v) {
  require_keys(j, {"s_start_mm", "s_end_mm", "speed_mm_s", "sample_rate_hz"}, "scan plan");
  read_opt(j, "s_start_mm", v.s_start_mm);
  read_opt(j, "s_end_mm", v.s_end_mm);
  read_opt(j, "speed_mm_s", v.speed_mm_s);
  read_opt(j, "sample_rate_hz", v.sample_rate_hz);
}

void to_json(Json& j, const Sample& v) {
  j = Json{{"t_s", v.t_s},           {"position_mm", v.position_mm}, {"delta_L_um", v.delta_L_um},
           {"theta_deg", v.theta_deg}, {"i1", v.i1},                   {"i2", v.i2}};
}

}  // namespace osclab

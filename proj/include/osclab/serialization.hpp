#pragma once

// JSON mappings for configuration and record types, shared by the trace
// header, the fit report and the HTTP API. Decoding is strict: unknown keys
// are rejected, missing keys keep their defaults.

#include <json.hpp>

#include "osclab/daq.hpp"

namespace osclab {

using Json = nlohmann::json;

void to_json(Json& j, const LaserSpec& v);
void from_json(const Json& j, LaserSpec& v);
void to_json(Json& j, const CrystalDoublet& v);
void from_json(const Json& j, CrystalDoublet& v);
void to_json(Json& j, const BeamlineConfig& v);
void from_json(const Json& j, BeamlineConfig& v);
void to_json(Json& j, const NoiseModel& v);
void from_json(const Json& j, NoiseModel& v);
void to_json(Json& j, const ScanPlan& v);
void from_json(const Json& j, ScanPlan& v);
void to_json(Json& j, const Sample& v);

/// Throws InvalidArgument if `j` is not an object or has a key outside `allowed`.
void require_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view what);

}  // namespace osclab

#pragma once

// Trace files: `# key: <json>` metadata lines, then a CSV header row and one
// row per sample. Columns are located by header name, so their order is free.
//
//   # osclab-trace: 1
//   # laser: {"center_wavelength_m":6.33e-07,...}
//   ...
//   time_s,position_mm,delta_L_um,theta_deg,i1,i2
//   0,0,0,45,0.5,0

#include <filesystem>
#include <iosfwd>
#include <string>

#include "osclab/daq.hpp"

namespace osclab {

/// Throws InvalidArgument for an empty trace.
void write_trace(const Trace& trace, std::ostream& out);
void write_trace(const Trace& trace, const std::filesystem::path& path);
std::string trace_to_csv(const Trace& trace);

/// Throws ParseError (with line number) on malformed input, Error if the file cannot be opened.
Trace read_trace(std::istream& in);
Trace read_trace(const std::filesystem::path& path);

}  // namespace osclab

#include "osclab/trace_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "osclab/errors.hpp"
#include "osclab/serialization.hpp"

namespace osclab {

namespace {

constexpr std::array<std::string_view, 6> kColumns = {"time_s", "position_mm", "delta_L_um",
                                                      "theta_deg", "i1", "i2"};
constexpr int kFormatVersion = 1;

void append_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(std::string_view field, std::size_t line, std::string_view column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (field.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ParseError(line, "column '" + std::string(column) + "': not a number: '" + std::string(field) + "'");
  }
  return v;
}

void apply_metadata(TraceMetadata& meta, std::string_view key, const Json& value) {
  if (key == "osclab-trace") {
    if (value.get<int>() != kFormatVersion) throw InvalidArgument("unsupported trace format version");
  } else if (key == "laser") {
    meta.config.laser = value.get<LaserSpec>();
  } else if (key == "crystal") {
    meta.config.crystal = value.get<CrystalDoublet>();
  } else if (key == "beamline") {
    meta.config.beamline = value.get<BeamlineConfig>();
  } else if (key == "noise") {
    meta.config.noise = value.get<NoiseModel>();
  } else if (key == "quadrature_points") {
    meta.config.quadrature_points = value.get<int>();
  } else if (key == "table_rotation_deg") {
    meta.table_rotation_deg = value.get<double>();
  } else if (key == "plan") {
    if (!value.is_null()) meta.plan = value.get<ScanPlan>();
  } else if (key == "t_start_s") {
    meta.t_start_s = value.get<double>();
  } else if (key == "t_end_s") {
    meta.t_end_s = value.get<double>();
  }
  // Other keys are free-form annotations.
}

}  // namespace

std::string trace_to_csv(const Trace& trace) {
  if (trace.samples.empty()) throw InvalidArgument("cannot write an empty trace");
  const auto& m = trace.meta;
  std::string out;
  out.reserve(64 * (trace.samples.size() + 16));
  auto meta_line = [&](std::string_view key, const Json& value) {
    out += "# ";
    out += key;
    out += ": ";
    out += value.dump();
    out += '\n';
  };
  meta_line("osclab-trace", kFormatVersion);
  meta_line("laser", m.config.laser);
  meta_line("crystal", m.config.crystal);
  meta_line("beamline", m.config.beamline);
  meta_line("noise", m.config.noise);
  meta_line("quadrature_points", m.config.quadrature_points);
  meta_line("table_rotation_deg", m.table_rotation_deg);
  meta_line("plan", m.plan ? Json(*m.plan) : Json(nullptr));
  meta_line("t_start_s", m.t_start_s);
  meta_line("t_end_s", m.t_end_s);

  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    if (c) out += ',';
    out += kColumns[c];
  }
  out += '\n';
  for (const auto& s : trace.samples) {
    for (double v : {s.t_s, s.position_mm, s.delta_L_um, s.theta_deg, s.i1, s.i2}) {
      append_number(out, v);
      out += ',';
    }
    out.back() = '\n';
  }
  return out;
}

void write_trace(const Trace& trace, std::ostream& out) {
  out << trace_to_csv(trace);
  if (!out) throw Error("failed to write trace");
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  const auto text = trace_to_csv(trace);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw Error("failed to write '" + path.string() + "'");
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::array<int, kColumns.size()> column_index{};
  column_index.fill(-1);
  std::size_t field_count = 0;
  bool have_header = false;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) throw ParseError(line_no, "metadata line lacks 'key: value'");
      const auto key = trim(body.substr(0, colon));
      try {
        apply_metadata(trace.meta, key, Json::parse(trim(body.substr(colon + 1))));
      } catch (const Json::exception& e) {
        throw ParseError(line_no, "metadata '" + std::string(key) + "': " + e.what());
      } catch (const InvalidArgument& e) {
        throw ParseError(line_no, "metadata '" + std::string(key) + "': " + e.what());
      }
      continue;
    }

    const auto fields = split_csv(line);
    if (!have_header) {
      for (std::size_t f = 0; f < fields.size(); ++f) {
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
          if (fields[f] == kColumns[c]) {
            if (column_index[c] != -1) throw ParseError(line_no, "duplicate column '" + std::string(kColumns[c]) + "'");
            column_index[c] = static_cast<int>(f);
          }
        }
      }
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        if (column_index[c] == -1) throw ParseError(line_no, "missing column '" + std::string(kColumns[c]) + "'");
      }
      field_count = fields.size();
      have_header = true;
      continue;
    }

    if (fields.size() != field_count) {
      throw ParseError(line_no, "expected " + std::to_string(field_count) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    std::array<double, kColumns.size()> v{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      v[c] = parse_number(fields[column_index[c]], line_no, kColumns[c]);
    }
    trace.samples.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
  }

  if (!have_header) throw ParseError(line_no, "no CSV header row");
  if (trace.samples.empty()) throw ParseError(line_no, "trace has no samples");
  return trace;
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open trace file '" + path.string() + "'");
  return read_trace(f);
}

}  // namespace osclab

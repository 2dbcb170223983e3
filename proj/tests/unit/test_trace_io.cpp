#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "osclab/daq.hpp"
#include "osclab/errors.hpp"
#include "osclab/trace_io.hpp"

using namespace osclab;

namespace {

Trace sample_trace() {
  DaqConfig c;
  c.noise.seed = 5;
  c.laser = LaserSpec::diode();
  Daq daq(c);
  daq.set_rotation(12.5);
  return daq.run_scan({0.5, 4.0, 0.35, 20});
}

int parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    read_trace(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(TraceIo, RoundTripIsExact) {
  const Trace t = sample_trace();
  const std::string csv = trace_to_csv(t);
  std::istringstream in(csv);
  const Trace back = read_trace(in);
  EXPECT_EQ(back.samples, t.samples);
  EXPECT_EQ(back.meta.config.laser.name, "diode");
  EXPECT_EQ(back.meta.config.laser.fwhm_m, t.meta.config.laser.fwhm_m);
  EXPECT_EQ(back.meta.config.noise, t.meta.config.noise);
  EXPECT_EQ(back.meta.table_rotation_deg, 12.5);
  ASSERT_TRUE(back.meta.plan.has_value());
  EXPECT_EQ(*back.meta.plan, *t.meta.plan);
  EXPECT_EQ(trace_to_csv(back), csv);
}

TEST(TraceIo, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "osclab_trace_io_test.csv";
  const Trace t = sample_trace();
  write_trace(t, path);
  EXPECT_EQ(read_trace(path).samples, t.samples);
  std::filesystem::remove(path);
  EXPECT_THROW(read_trace(path), Error);
}

TEST(TraceIo, EmptyTraceRefused) {
  Trace t;
  std::ostringstream out;
  EXPECT_THROW(write_trace(t, out), Error);
  EXPECT_THROW(trace_to_csv(t), Error);
}

TEST(TraceIo, ColumnOrderIsFree) {
  const std::string text =
      "i2,time_s,theta_deg,position_mm,i1,delta_L_um\n"
      "0.25,0,45,1,0.25,6.9\n"
      "0.5,0.1,45,1.5,0,10.3\n";
  std::istringstream in(text);
  const Trace t = read_trace(in);
  ASSERT_EQ(t.samples.size(), 2u);
  EXPECT_EQ(t.samples[1].i2, 0.5);
  EXPECT_EQ(t.samples[1].position_mm, 1.5);
  EXPECT_EQ(t.samples[1].delta_L_um, 10.3);
  EXPECT_EQ(t.samples[1].t_s, 0.1);
}

TEST(TraceIo, MalformedInputReportsLine) {
  const std::string header = "time_s,position_mm,delta_L_um,theta_deg,i1,i2\n";
  EXPECT_EQ(parse_error_line(header + "0,1,2,45,0.1,0.2\n0,1,2,45,0.1\n"), 3);
  EXPECT_EQ(parse_error_line(header + "0,1,2,45,abc,0.2\n"), 2);
  EXPECT_EQ(parse_error_line("# osclab-trace: 1\ntime_s,position_mm,delta_L_um,theta_deg,i1\n0,1,2,45,0.1\n"), 2);
  EXPECT_EQ(parse_error_line("time_s,time_s,position_mm,delta_L_um,theta_deg,i1,i2\n"), 1);
  EXPECT_EQ(parse_error_line(header), 1);
  EXPECT_NE(parse_error_line(""), -1);
  EXPECT_EQ(parse_error_line("# laser: {not json\n" + header + "0,1,2,45,0.1,0.2\n"), 1);
}

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <atomic>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include "osclab/analysis.hpp"
#include "osclab/config.hpp"
#include "osclab/errors.hpp"
#include "osclab/kernels.hpp"
#include "osclab/phase_laws.hpp"
#include "osclab/service.hpp"
#include "osclab/trace_io.hpp"

// after the Eigen-based headers: httplib pulls in <resolv.h>, whose `_res` macro breaks Eigen
#include <httplib.h>

namespace osclab::cli {

namespace {

std::atomic<bool> g_stop_requested{false};

extern "C" void on_signal(int) { g_stop_requested = true; }

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool fast = false;
};

struct CurveOptions {
  double theta_deg = 45.0;
  std::string mode = "optical";
  std::optional<double> l_min;
  std::optional<double> l_max;
  int points = 1001;
  std::string laser;
  double delta_m2 = 2.5e-3;
  double energy_gev = 1.0;
  std::string out;
};

struct ScanOptions {
  ScanPlan plan;
  std::optional<double> rotation_deg;
  std::optional<double> theta_deg;
  std::string laser;
  std::optional<double> sigma_intensity;
  std::optional<double> sigma_position;
  std::string out;
};

struct FitOptionsCli {
  std::string trace;
  std::string out;
};

struct ServeOptions {
  std::optional<std::string> host;
  std::optional<int> port;
};

void append_number(std::string& s, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, res.ptr);
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("failed to write '" + path + "'");
}

// A config that does not parse or validate is a usage error (exit 2);
// an unreadable file stays a runtime error.
LabConfig load_lab_config(const GlobalOptions& g) {
  LabConfig cfg;
  if (!g.config_path.empty()) {
    try {
      cfg = load_config(g.config_path);
    } catch (const ParseError& e) {
      throw InvalidArgument(g.config_path + ": " + e.what());
    }
  }
  if (g.seed) cfg.noise.seed = *g.seed;
  cfg.validate();
  return cfg;
}

int cmd_curve(const GlobalOptions& g, const CurveOptions& o, std::ostream& out) {
  const LabConfig cfg = load_lab_config(g);
  if (o.points < 2) throw InvalidArgument("--points must be at least 2");
  const MixingAngle theta = MixingAngle::from_degrees(o.theta_deg);

  std::string csv;
  if (o.mode == "neutrino") {
    const double lo = o.l_min.value_or(0.0);
    const double hi = o.l_max.value_or(2000.0);
    if (!(hi > lo) || lo < 0.0) throw InvalidArgument("baseline range must satisfy 0 <= L_min < L_max");
    csv = "L_km,p_appear,p_survive\n";
    for (int i = 0; i < o.points; ++i) {
      const double l = lo + (hi - lo) * i / (o.points - 1);
      const double phase = neutrino_phase_diff({o.delta_m2, o.energy_gev, l});
      const auto p = transition_probability_closed(theta, phase);
      append_number(csv, l);
      csv += ',';
      append_number(csv, p.p_appear);
      csv += ',';
      append_number(csv, p.p_survive);
      csv += '\n';
    }
  } else if (o.mode == "optical") {
    const LaserSpec laser = cfg.laser(o.laser.empty() ? cfg.active_laser : o.laser);
    const double full_travel_um =
        2.0 * cfg.crystal.travel_range_mm * std::tan(cfg.crystal.wedge_angle_deg * std::numbers::pi / 180.0) * 1e3;
    const double lo = o.l_min.value_or(0.0);
    const double hi = o.l_max.value_or(full_travel_um);
    if (!(hi > lo) || lo < 0.0) throw InvalidArgument("path range must satisfy 0 <= L_min < L_max");

    std::vector<double> paths(static_cast<std::size_t>(o.points));
    for (int i = 0; i < o.points; ++i) paths[i] = (lo + (hi - lo) * i / (o.points - 1)) * 1e-6;
    std::vector<TransitionResult> probs(paths.size());
    const auto quad = SpectralQuadrature::build(laser, cfg.quadrature_points);
    kernels::spectrum_curve_parallel(theta, paths, quad, cfg.crystal.birefringence(), 0.0, probs);

    csv = "L_um,p_appear,p_survive\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
      append_number(csv, paths[i] * 1e6);
      csv += ',';
      append_number(csv, probs[i].p_appear);
      csv += ',';
      append_number(csv, probs[i].p_survive);
      csv += '\n';
    }
  } else {
    throw InvalidArgument("--mode must be optical or neutrino");
  }
  emit(csv, o.out, out);
  return kSuccess;
}

int cmd_scan(const GlobalOptions& g, const ScanOptions& o, std::ostream& out) {
  LabConfig cfg = load_lab_config(g);
  if (!o.laser.empty()) cfg.active_laser = o.laser;
  if (o.sigma_intensity) cfg.noise.sigma_intensity = *o.sigma_intensity;
  if (o.sigma_position) cfg.noise.sigma_position_mm = *o.sigma_position;
  cfg.validate();

  Daq daq(cfg.daq_config());
  if (o.theta_deg) {
    if (*o.theta_deg < 0.0 || *o.theta_deg > 90.0) throw InvalidArgument("--theta-deg must lie in [0, 90]");
    daq.set_rotation(45.0 - *o.theta_deg);
  } else if (o.rotation_deg) {
    daq.set_rotation(*o.rotation_deg);
  }
  const Trace trace = daq.run_scan(o.plan);
  emit(trace_to_csv(trace), o.out, out);
  return kSuccess;
}

int cmd_fit(const FitOptionsCli& o, std::ostream& out, std::ostream& err) {
  const Trace trace = read_trace(std::filesystem::path(o.trace));
  const FitModel guess = seed_guess(trace);
  const FitResult result = fit_trace(trace, guess);
  emit(to_json(result).dump(2) + "\n", o.out, out);
  if (!result.converged) {
    err << "osclab fit: not converged: " << result.message << "\n";
    return kRuntimeError;
  }
  return kSuccess;
}

int cmd_serve(const GlobalOptions& g, const ServeOptions& o, std::ostream& out, std::ostream& err) {
  LabConfig cfg = load_lab_config(g);
  if (o.host) cfg.service.host = *o.host;
  if (o.port) cfg.service.port = *o.port;
  cfg.validate();

  LabService service(cfg, ServiceOptions{g.fast});
  httplib::Server server;
  // httplib's default also sets SO_REUSEPORT, which would let us share a port
  // with a running instance instead of reporting it as taken.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  mount_routes(server, service);

  int port = cfg.service.port;
  if (port == 0) {
    port = server.bind_to_any_port(cfg.service.host);
    if (port < 0) port = 0;
  } else if (!server.bind_to_port(cfg.service.host, port)) {
    port = 0;
  }
  if (port == 0) {
    err << "osclab serve: cannot bind " << cfg.service.host << ":" << cfg.service.port
        << " (port in use or not permitted)\n";
    return kRuntimeError;
  }
  out << "osclab serving on http://" << cfg.service.host << ":" << port << (g.fast ? " (fast scans)" : "")
      << std::endl;

  g_stop_requested = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread listener([&] { server.listen_after_bind(); });
  while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  service.shutdown();
  server.stop();
  listener.join();
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Virtual birefringent-crystal oscillation lab", "osclab"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "Lab configuration file (YAML)");
  app.add_option("--seed", global.seed, "Noise RNG seed (overrides the config)");
  app.add_flag("--fast", global.fast, "Run service scans at full speed");

  CurveOptions curve;
  auto* curve_cmd = app.add_subcommand("curve", "Tabulate transition probabilities versus path length");
  curve_cmd->add_option("--theta-deg", curve.theta_deg, "Mixing angle, degrees")->capture_default_str();
  curve_cmd->add_option("--mode", curve.mode, "optical or neutrino")
      ->check(CLI::IsMember({"optical", "neutrino"}))
      ->capture_default_str();
  curve_cmd->add_option("--l-min", curve.l_min, "Range start (um optical, km neutrino)");
  curve_cmd->add_option("--l-max", curve.l_max, "Range end (um optical, km neutrino)");
  curve_cmd->add_option("--points", curve.points, "Number of points")->capture_default_str();
  curve_cmd->add_option("--laser", curve.laser, "Laser preset (optical mode)");
  curve_cmd->add_option("--dm2", curve.delta_m2, "Mass-squared splitting, eV^2 (neutrino mode)")
      ->capture_default_str();
  curve_cmd->add_option("--energy", curve.energy_gev, "Neutrino energy, GeV (neutrino mode)")->capture_default_str();
  curve_cmd->add_option("--out", curve.out, "Output CSV (default stdout)");

  ScanOptions scan;
  auto* scan_cmd = app.add_subcommand("scan", "Run a simulated manipulator scan and write the trace CSV");
  scan_cmd->add_option("--from", scan.plan.s_start_mm, "Start position, mm")->capture_default_str();
  scan_cmd->add_option("--to", scan.plan.s_end_mm, "End position, mm")->capture_default_str();
  scan_cmd->add_option("--speed", scan.plan.speed_mm_s, "Manipulator speed, mm/s")->capture_default_str();
  scan_cmd->add_option("--rate", scan.plan.sample_rate_hz, "Sample rate, Hz")->capture_default_str();
  auto* rot = scan_cmd->add_option("--rotation-deg", scan.rotation_deg, "Table rotation, degrees [-45, 45]");
  scan_cmd->add_option("--theta-deg", scan.theta_deg, "Mixing angle, degrees (sets rotation = 45 - theta)")
      ->excludes(rot);
  scan_cmd->add_option("--laser", scan.laser, "Laser preset (hene, diode)");
  scan_cmd->add_option("--sigma-intensity", scan.sigma_intensity, "Override intensity noise sigma");
  scan_cmd->add_option("--sigma-position", scan.sigma_position, "Override position noise sigma, mm");
  scan_cmd->add_option("--out", scan.out, "Output CSV (default stdout)");

  FitOptionsCli fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a trace CSV; exit code 0 iff the fit converged");
  fit_cmd->add_option("trace", fit.trace, "Trace CSV")->required();
  fit_cmd->add_option("--out", fit.out, "Report JSON (default stdout)");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP control service");
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "osclab: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (*curve_cmd) return cmd_curve(global, curve, out);
    if (*scan_cmd) return cmd_scan(global, scan, out);
    if (*fit_cmd) return cmd_fit(fit, out, err);
    if (*serve_cmd) return cmd_serve(global, serve, out, err);
  } catch (const PreconditionError& e) {
    err << "osclab: precondition failed: " << e.what() << "\n";
    return kUsageError;
  } catch (const InvalidArgument& e) {
    err << "osclab: invalid argument: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "osclab: error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace osclab::cli

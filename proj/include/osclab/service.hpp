#pragma once

// HTTP control service for the virtual lab.
//
// One simulation thread owns the Daq. Request handlers never touch it
// directly: they enqueue a command and wait for its result, and read state
// from snapshots published after each simulation step. Stream clients read
// an append-only sample log.
//
//   GET  /api/state        current snapshot (JSON)
//   POST /api/controls     ControlCommand (JSON)
//   POST /api/scan         ScanPlan (JSON)
//   POST /api/scan/stop
//   GET  /api/stream       server-sent events, event "sample", one Sample per event
//   GET  /api/trace        text/csv of the current trace

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "osclab/config.hpp"
#include "osclab/serialization.hpp"

namespace httplib {
class Server;
}

namespace osclab {

struct ControlCommand {
  std::optional<double> position_mm;
  std::optional<double> rotation_deg;
  std::optional<std::string> laser;
  std::optional<ScanPlan> scan;

  /// Strict decoding; at least one field must be present.
  static ControlCommand from_json(const Json& j);
};

struct StateSnapshot {
  /// Last emitted sample: position, theta and readings come from one step.
  Sample sample;
  double rotation_deg = 0.0;
  std::string laser;
  Session session = Session::idle;
  std::optional<ScanPlan> plan;
  std::size_t trace_samples = 0;
  std::uint64_t sequence = 0;

  Json to_json() const;
};

struct ServiceOptions {
  /// Run scans as fast as possible instead of pacing them against the wall clock.
  bool fast = false;
};

class LabService {
 public:
  LabService(LabConfig config, ServiceOptions options);
  ~LabService();

  LabService(const LabService&) = delete;
  LabService& operator=(const LabService&) = delete;

  StateSnapshot state() const;

  /// Applies a command on the simulation thread. Throws InvalidArgument for
  /// bad values and PreconditionError when a running scan owns the manipulator.
  StateSnapshot apply(const ControlCommand& command);
  StateSnapshot start_scan(const ScanPlan& plan);
  StateSnapshot stop_scan();

  /// CSV of the current trace; PreconditionError if nothing was recorded yet.
  std::string trace_csv();

  /// Samples with sequence number >= `from`, waiting up to `timeout` for the
  /// first one. Returns (sequence, sample) pairs in order.
  std::vector<std::pair<std::uint64_t, Sample>> wait_samples(std::uint64_t from, std::chrono::milliseconds timeout,
                                                             std::size_t max_count = 512) const;
  /// Sequence number the next sample will get.
  std::uint64_t sample_head() const;

  void shutdown();
  bool running() const { return running_.load(); }

  const LabConfig& config() const { return config_; }

 private:
  using Command = std::function<void(Daq&)>;

  template <class F>
  auto submit(F&& f) -> decltype(f(std::declval<Daq&>()));

  void run();
  void publish(Daq& daq, const Sample& s);

  LabConfig config_;
  ServiceOptions options_;

  mutable std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<Command> queue_;

  mutable std::mutex state_mu_;
  mutable std::condition_variable samples_cv_;
  StateSnapshot snapshot_;
  std::deque<Sample> log_;
  std::uint64_t log_base_ = 0;

  // Touched only by the simulation thread.
  std::chrono::steady_clock::time_point next_tick_;

  std::atomic<bool> running_{true};
  std::thread worker_;
};

/// Registers the /api routes on `server`.
void mount_routes(httplib::Server& server, LabService& service);

}  // namespace osclab

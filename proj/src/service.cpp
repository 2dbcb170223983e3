#include "osclab/service.hpp"

#include <httplib.h>

#include "osclab/errors.hpp"
#include "osclab/trace_io.hpp"

namespace osclab {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kMaxLogSamples = 200'000;
constexpr int kFastBatch = 256;

std::string_view session_name(Session s) {
  switch (s) {
    case Session::idle: return "idle";
    case Session::manual: return "manual";
    case Session::scan: return "scan";
  }
  return "idle";
}

Clock::duration period_of(double rate_hz) {
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / rate_hz));
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, Json{{"error", message}});
}

// Runs a handler body, mapping library errors onto HTTP status codes.
template <class F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const Json::exception& e) {
    send_error(res, 400, std::string("malformed JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    send_error(res, 400, e.what());
  } catch (const PreconditionError& e) {
    send_error(res, 409, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  return Json::parse(req.body);
}

}  // namespace

ControlCommand ControlCommand::from_json(const Json& j) {
  require_keys(j, {"position_mm", "rotation_deg", "laser", "scan"}, "control command");
  ControlCommand c;
  try {
    if (j.contains("position_mm")) c.position_mm = j.at("position_mm").get<double>();
    if (j.contains("rotation_deg")) c.rotation_deg = j.at("rotation_deg").get<double>();
    if (j.contains("laser")) c.laser = j.at("laser").get<std::string>();
  } catch (const Json::type_error&) {
    throw InvalidArgument("control command field has the wrong type");
  }
  if (j.contains("scan")) c.scan = j.at("scan").get<ScanPlan>();
  if (!c.position_mm && !c.rotation_deg && !c.laser && !c.scan) {
    throw InvalidArgument("control command needs at least one of position_mm, rotation_deg, laser, scan");
  }
  return c;
}

Json StateSnapshot::to_json() const {
  return Json{{"t_s", sample.t_s},
              {"position_mm", sample.position_mm},
              {"delta_L_um", sample.delta_L_um},
              {"theta_deg", sample.theta_deg},
              {"i1", sample.i1},
              {"i2", sample.i2},
              {"rotation_deg", rotation_deg},
              {"laser", laser},
              {"session", std::string(session_name(session))},
              {"scanning", session == Session::scan},
              {"plan", plan ? Json(*plan) : Json(nullptr)},
              {"trace_samples", trace_samples},
              {"sequence", sequence}};
}

LabService::LabService(LabConfig config, ServiceOptions options)
    : config_(std::move(config)), options_(options) {
  config_.validate();
  // Construct the Daq here so configuration errors surface in the caller.
  Daq probe(config_.daq_config());
  (void)probe;
  worker_ = std::thread([this] { run(); });
  // Wait for the first published sample.
  (void)wait_samples(0, std::chrono::milliseconds(5000), 1);
}

LabService::~LabService() { shutdown(); }

void LabService::shutdown() {
  if (!running_.exchange(false)) {
    if (worker_.joinable()) worker_.join();
    return;
  }
  queue_cv_.notify_all();
  samples_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

template <class F>
auto LabService::submit(F&& f) -> decltype(f(std::declval<Daq&>())) {
  using R = decltype(f(std::declval<Daq&>()));
  auto promise = std::make_shared<std::promise<R>>();
  auto future = promise->get_future();
  {
    std::lock_guard lock(queue_mu_);
    if (!running_) throw Error("service is shutting down");
    queue_.emplace_back([promise, fn = std::forward<F>(f)](Daq& daq) mutable {
      try {
        if constexpr (std::is_void_v<R>) {
          fn(daq);
          promise->set_value();
        } else {
          promise->set_value(fn(daq));
        }
      } catch (...) {
        promise->set_exception(std::current_exception());
      }
    });
  }
  queue_cv_.notify_one();
  return future.get();
}

void LabService::publish(Daq& daq, const Sample& s) {
  {
    std::lock_guard lock(state_mu_);
    log_.push_back(s);
    if (log_.size() > kMaxLogSamples) {
      log_.pop_front();
      ++log_base_;
    }
    snapshot_.sample = s;
    snapshot_.rotation_deg = daq.rig().table_rotation_deg;
    snapshot_.laser = daq.config().laser.name;
    snapshot_.session = daq.session();
    snapshot_.plan = daq.active_plan();
    snapshot_.trace_samples = daq.trace().samples.size();
    snapshot_.sequence = log_base_ + log_.size() - 1;
  }
  samples_cv_.notify_all();
}

void LabService::run() {
  Daq daq(config_.daq_config());
  daq.begin_manual();
  publish(daq, daq.step(0.0));
  const auto live_period = period_of(config_.service.live_rate_hz);
  next_tick_ = Clock::now() + live_period;

  while (running_) {
    std::deque<Command> batch;
    {
      std::lock_guard lock(queue_mu_);
      batch.swap(queue_);
    }
    for (auto& command : batch) command(daq);

    const auto now = Clock::now();
    if (daq.session() == Session::scan) {
      const double rate = daq.active_plan()->sample_rate_hz;
      if (options_.fast) {
        for (int i = 0; i < kFastBatch && daq.session() == Session::scan; ++i) publish(daq, daq.step(1.0 / rate));
        if (daq.session() != Session::scan) next_tick_ = Clock::now() + live_period;
        continue;
      }
      if (now >= next_tick_) {
        publish(daq, daq.step(1.0 / rate));
        next_tick_ += period_of(rate);
        if (daq.session() != Session::scan) next_tick_ = now + live_period;
      }
    } else if (daq.session() == Session::manual) {
      if (now >= next_tick_) {
        publish(daq, daq.step(1.0 / config_.service.live_rate_hz));
        next_tick_ += live_period;
      }
    }
    // Falling far behind (suspended process): resynchronize instead of bursting.
    if (next_tick_ + std::chrono::seconds(1) < Clock::now()) next_tick_ = Clock::now();

    std::unique_lock lock(queue_mu_);
    queue_cv_.wait_until(lock, next_tick_, [this] { return !queue_.empty() || !running_; });
  }
}

StateSnapshot LabService::state() const {
  std::lock_guard lock(state_mu_);
  return snapshot_;
}

StateSnapshot LabService::apply(const ControlCommand& command) {
  submit([this, &command](Daq& daq) {
    const bool scanning = daq.session() == Session::scan;
    if (command.position_mm && scanning) throw PreconditionError("a scan is running and owns the manipulator");
    if (command.scan && scanning) throw PreconditionError("a scan is already running");
    if (command.position_mm && !std::isfinite(*command.position_mm)) throw InvalidArgument("position must be finite");
    if (command.rotation_deg && !std::isfinite(*command.rotation_deg)) throw InvalidArgument("rotation must be finite");
    if (command.scan) command.scan->validate();
    std::optional<LaserSpec> laser;
    if (command.laser) laser = config_.laser(*command.laser);

    if (command.rotation_deg) daq.set_rotation(*command.rotation_deg);
    if (laser) daq.set_laser(*laser);
    if (command.position_mm) daq.set_position(*command.position_mm);
    if (command.scan) {
      daq.begin_scan(*command.scan);
      publish(daq, daq.step(0.0));
      next_tick_ = Clock::now() + period_of(command.scan->sample_rate_hz);
    } else if (!scanning) {
      if (daq.session() != Session::manual) daq.begin_manual();
      publish(daq, daq.step(0.0));
    }
  });
  return state();
}

StateSnapshot LabService::start_scan(const ScanPlan& plan) {
  ControlCommand c;
  c.scan = plan;
  return apply(c);
}

StateSnapshot LabService::stop_scan() {
  submit([this](Daq& daq) {
    if (daq.session() == Session::scan) daq.stop();
    if (daq.session() != Session::manual) daq.begin_manual();
    publish(daq, daq.step(0.0));
    next_tick_ = Clock::now() + period_of(config_.service.live_rate_hz);
  });
  return state();
}

std::string LabService::trace_csv() {
  return submit([](Daq& daq) {
    if (daq.trace().samples.empty()) throw PreconditionError("no trace recorded yet");
    return trace_to_csv(daq.trace());
  });
}

std::vector<std::pair<std::uint64_t, Sample>> LabService::wait_samples(std::uint64_t from,
                                                                       std::chrono::milliseconds timeout,
                                                                       std::size_t max_count) const {
  std::unique_lock lock(state_mu_);
  samples_cv_.wait_for(lock, timeout, [&] { return log_base_ + log_.size() > from || !running_; });
  std::vector<std::pair<std::uint64_t, Sample>> out;
  const std::uint64_t head = log_base_ + log_.size();
  for (std::uint64_t seq = std::max(from, log_base_); seq < head && out.size() < max_count; ++seq) {
    out.emplace_back(seq, log_[seq - log_base_]);
  }
  return out;
}

std::uint64_t LabService::sample_head() const {
  std::lock_guard lock(state_mu_);
  return log_base_ + log_.size();
}

void mount_routes(httplib::Server& server, LabService& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
    res.status = 204;
  });

  server.Get("/api/state", [&service](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, service.state().to_json()); });
  });

  server.Post("/api/controls", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto command = ControlCommand::from_json(parse_body(req));
      send_json(res, 200, service.apply(command).to_json());
    });
  });

  server.Post("/api/scan", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto plan = parse_body(req).get<ScanPlan>();
      send_json(res, 202, service.start_scan(plan).to_json());
    });
  });

  server.Post("/api/scan/stop", [&service](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, service.stop_scan().to_json()); });
  });

  server.Get("/api/trace", [&service](const httplib::Request&, httplib::Response& res) {
    try {
      res.set_content(service.trace_csv(), "text/csv");
    } catch (const PreconditionError& e) {
      send_error(res, 404, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  });

  server.Get("/api/stream", [&service](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t start = service.sample_head();
    try {
      if (req.has_param("from")) {
        start = std::stoull(req.get_param_value("from"));
      } else if (req.has_header("Last-Event-ID")) {
        start = std::stoull(req.get_header_value("Last-Event-ID")) + 1;
      }
    } catch (const std::exception&) {
      send_error(res, 400, "invalid stream cursor");
      return;
    }
    auto cursor = std::make_shared<std::uint64_t>(start);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [&service, cursor](std::size_t, httplib::DataSink& sink) {
      const auto batch = service.wait_samples(*cursor, std::chrono::milliseconds(250));
      if (!service.running()) {
        sink.done();
        return true;
      }
      if (batch.empty()) {
        static constexpr char kKeepAlive[] = ": keep-alive\n\n";
        return sink.write(kKeepAlive, sizeof(kKeepAlive) - 1);
      }
      std::string chunk;
      for (const auto& [seq, sample] : batch) {
        chunk += "id: " + std::to_string(seq) + "\nevent: sample\ndata: " + Json(sample).dump() + "\n\n";
        *cursor = seq + 1;
      }
      return sink.write(chunk.data(), chunk.size());
    });
  });
}

}  // namespace osclab

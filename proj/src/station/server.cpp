#include "station/server.hpp"

#include <chrono>

#include <httplib.h>

namespace gmp3 {

using nlohmann::json;

namespace {

class TcpDroneLink final : public DroneLink {
 public:
  explicit TcpDroneLink(std::shared_ptr<net::TcpStream> stream) : stream_(std::move(stream)) {}
  void send(const wire::Message& m) override {
    try {
      stream_->send_all(wire::encode(m));
    } catch (const IoError&) {
    }
  }
  void close() override { stream_->shutdown(); }

 private:
  std::shared_ptr<net::TcpStream> stream_;
};

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

StationServer::StationServer(StationConfig station, ServerConfig server)
    : station_(std::move(station)), config_(std::move(server)), t0_(std::chrono::steady_clock::now()) {}

StationServer::~StationServer() { stop(); }

double StationServer::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
}

void StationServer::start() {
  if (running_) return;
  listener_ = std::make_unique<net::TcpListener>(config_.host, config_.drone_port);
  drone_port_ = listener_->port();

  http_ = std::make_unique<httplib::Server>();
  install_routes();
  if (config_.http_port == 0) {
    http_port_ = http_->bind_to_any_port(config_.host);
    if (http_port_ <= 0) {
      listener_.reset();
      throw net::PortBusy("cannot bind HTTP port on " + config_.host);
    }
  } else {
    if (!http_->bind_to_port(config_.host, config_.http_port)) {
      listener_.reset();
      throw net::PortBusy("cannot bind " + config_.host + ":" + std::to_string(config_.http_port));
    }
    http_port_ = config_.http_port;
  }

  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
  dispatch_thread_ = std::thread([this] { dispatch_loop(); });
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
}

void StationServer::stop() {
  if (!running_.exchange(false)) return;
  station_.shutdown(now());
  if (listener_) listener_->close();
  if (accept_thread_.joinable()) accept_thread_.join();
  if (dispatch_thread_.joinable()) dispatch_thread_.join();
  http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
  std::list<std::thread> threads;
  {
    std::lock_guard lock(conn_m_);
    for (auto& s : streams_) s->shutdown();
    threads.swap(conn_threads_);
  }
  for (auto& t : threads) t.join();
  station_.plugins().unload_all();
}

void StationServer::accept_loop() {
  while (running_) {
    auto stream = listener_->accept(0.1);
    if (!stream) continue;
    std::shared_ptr<net::TcpStream> shared(std::move(stream));
    std::lock_guard lock(conn_m_);
    streams_.push_back(shared);
    conn_threads_.emplace_back([this, shared] { serve_drone(shared); });
  }
}

void StationServer::serve_drone(std::shared_ptr<net::TcpStream> stream) {
  wire::LineBuffer lines;
  std::string chunk, line, id;
  const double hello_deadline = now() + 5.0;
  try {
    while (running_ && id.empty()) {
      if (now() > hello_deadline) return stream->shutdown();
      const auto n = stream->recv(chunk, 0.1);
      if (!n) continue;
      if (*n == 0) return;
      lines.append(chunk);
      if (!lines.next(line)) continue;
      const auto m = wire::decode(line);
      const auto* hello = std::get_if<wire::Hello>(&m);
      if (!hello) {
        stream->send_all(wire::encode(wire::Ack{0, false, "expected HELLO"}));
        return stream->shutdown();
      }
      const wire::Ack ack = station_.connect(*hello, std::make_shared<TcpDroneLink>(stream), now());
      if (!ack.ok) return stream->shutdown();
      id = hello->drone_id;
    }
    bool open = true;
    while (running_ && open) {
      while (lines.next(line)) {
        try {
          station_.on_message(id, wire::decode(line), now());
        } catch (const wire::ProtocolError& e) {
          station_.events().publish({{"type", "status"}, {"kind", "protocol_error"}, {"drone_id", id}, {"error", e.what()}});
        }
      }
      const auto n = stream->recv(chunk, 0.1);
      if (!n) continue;
      if (*n == 0) open = false;
      else lines.append(chunk);
    }
  } catch (const std::exception&) {
  }
  if (!id.empty() && running_) station_.disconnect(id, now());
}

void StationServer::dispatch_loop() {
  const auto period = std::chrono::duration<double>(config_.tick);
  auto next = std::chrono::steady_clock::now();
  while (running_) {
    station_.update(now());
    next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
    std::this_thread::sleep_until(next);
  }
}

void StationServer::install_routes() {
  auto& http = *http_;

  http.Get("/fleet", [this](const httplib::Request&, httplib::Response& res) { reply(res, 200, station_.fleet_json()); });

  http.Post("/cmd", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = parse_body(req);
    } catch (const json::exception& e) {
      return reply(res, 400, {{"ok", false}, {"reason", std::string("bad json: ") + e.what()}});
    }
    if (!body.is_object() || !body.contains("drone_id") || !body.contains("name") || !body["drone_id"].is_string() ||
        !body["name"].is_string()) {
      return reply(res, 400, {{"ok", false}, {"reason", "expected {drone_id, name, args}"}});
    }
    CommandRequest cmd{body["name"].get<std::string>(), body.value("args", json::object())};
    const auto r = station_.enqueue(body["drone_id"].get<std::string>(), cmd, now());
    json out = {{"ok", r.ok}, {"drone_id", body["drone_id"]}, {"name", cmd.name}};
    if (r.ok) out["id"] = r.id;
    else out["reason"] = r.reason;
    reply(res, r.ok ? 200 : (r.reason == "unknown drone" ? 404 : 409), out);
  });

  http.Get(R"(/plan/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const json plan = station_.plan_json(req.matches[1]);
    if (plan.is_null()) return reply(res, 404, {{"error", "no plan for drone"}});
    reply(res, 200, plan);
  });

  http.Get("/missions", [this](const httplib::Request&, httplib::Response& res) { reply(res, 200, station_.missions_json()); });

  http.Post(R"(/missions/([^/]+)/(start|stop))", [this](const httplib::Request& req, httplib::Response& res) {
    std::string reason;
    const bool ok = station_.mission_command(req.matches[1], req.matches[2] == "start", now(), &reason);
    json out = {{"ok", ok}, {"mission", std::string(req.matches[1])}};
    if (!ok) out["reason"] = reason;
    reply(res, ok ? 200 : (reason == "unknown mission" ? 404 : 409), out);
  });

  http.Post("/console", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const std::string out = station_.console(req.body);
      reply(res, 200, {{"ok", true}, {"output", out}});
    } catch (const std::exception& e) {
      reply(res, 400, {{"ok", false}, {"error", e.what()}});
    }
  });

  http.Get("/events", [this](const httplib::Request&, httplib::Response& res) {
    auto sub = station_.events().subscribe();
    auto first = std::make_shared<bool>(true);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, sub, first](std::size_t, httplib::DataSink& sink) {
          if (!running_) return false;
          if (*first) {
            *first = false;
            json hello = station_.fleet_json();
            hello["type"] = "fleet";
            hello["source"] = "snapshot";
            const std::string s = "data: " + hello.dump() + "\n\n";
            return sink.write(s.data(), s.size());
          }
          const auto frame = sub->pop(0.25);
          const std::string s = frame ? "data: " + frame->dump() + "\n\n" : std::string(": keepalive\n\n");
          return sink.write(s.data(), s.size());
        });
  });
}

}  // namespace gmp3

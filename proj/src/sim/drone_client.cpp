#include "sim/drone_client.hpp"

#include <chrono>
#include <cmath>

#include "station/socket.hpp"

namespace gmp3 {

using nlohmann::json;

wire::Ack handle_command(SimVehicle& vehicle, const wire::Cmd& cmd) {
  double arg = 0.0;
  if (cmd.name == "takeoff") arg = cmd.args.value("altitude", 1.0);
  if (cmd.name == "set_speed_cap") arg = cmd.args.value("speed", 0.0);
  const CommandReply r = vehicle.command(cmd.id, cmd.name, arg);
  return {cmd.id, r.ok, r.reason};
}

DroneClient::DroneClient(DroneClientConfig config)
    : config_(std::move(config)), vehicle_(config_.id, config_.start, config_.speed_cap) {
  if (!(config_.rate > 0.0)) throw InvalidArgument("telemetry rate must be > 0");
  if (!(config_.physics_dt > 0.0)) throw InvalidArgument("physics dt must be > 0");
}

DroneState DroneClient::state() const {
  std::lock_guard lock(m_);
  return vehicle_.state();
}

std::vector<Setpoint> DroneClient::setpoints() const {
  std::lock_guard lock(m_);
  return setpoints_;
}

void DroneClient::run() {
  using clock = std::chrono::steady_clock;
  auto stream = net::TcpStream::connect(config_.host, config_.port, config_.connect_timeout);
  stream->send_all(wire::encode(wire::Hello{config_.id, {"sim", "telemetry", "setpoint"}}));

  wire::LineBuffer lines;
  std::string chunk, line;
  const auto hello_deadline = clock::now() + std::chrono::duration<double>(config_.connect_timeout);
  bool welcomed = false;
  while (!welcomed) {
    if (clock::now() > hello_deadline) throw IoError("no answer to HELLO");
    const auto n = stream->recv(chunk, 0.1);
    if (!n) continue;
    if (*n == 0) throw IoError("station closed the connection");
    lines.append(chunk);
    while (!welcomed && lines.next(line)) {
      const auto m = wire::decode(line);
      if (const auto* ack = std::get_if<wire::Ack>(&m); ack && ack->id == 0) {
        if (!ack->ok) throw IoError("station refused HELLO: " + ack->reason);
        welcomed = true;
      }
    }
  }

  const auto t0 = clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };
  const long steps_per_frame = std::max(1L, std::lround(1.0 / (config_.rate * config_.physics_dt)));
  long step = 0;
  auto next_tick = clock::now();

  while (!stop_) {
    for (;;) {
      const double wait = std::chrono::duration<double>(next_tick - clock::now()).count();
      const auto n = stream->recv(chunk, std::max(0.0, wait));
      if (!n) break;
      if (*n == 0) return;
      lines.append(chunk);
      while (lines.next(line)) {
        wire::Message m;
        try {
          m = wire::decode(line);
        } catch (const wire::ProtocolError&) {
          continue;
        }
        std::lock_guard lock(m_);
        if (const auto* cmd = std::get_if<wire::Cmd>(&m)) {
          stream->send_all(wire::encode(handle_command(vehicle_, *cmd)));
        } else if (const auto* sp = std::get_if<Setpoint>(&m)) {
          setpoints_.push_back(*sp);
          vehicle_.apply_setpoint(*sp);
        }
      }
      if (clock::now() >= next_tick) break;
    }
    next_tick += std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(config_.physics_dt));
    Telemetry frame;
    {
      std::lock_guard lock(m_);
      vehicle_.advance(config_.physics_dt);
      ++step;
      if (step % steps_per_frame != 0) continue;
      frame = sim::telemetry(vehicle_.state(), elapsed());
    }
    try {
      stream->send_all(wire::encode(frame));
    } catch (const IoError&) {
      return;
    }
    ++telemetry_sent_;
  }
  stream->shutdown();
}

}  // namespace gmp3

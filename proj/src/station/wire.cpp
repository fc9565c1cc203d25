#include "station/wire.hpp"

namespace gmp3::wire {

using nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ProtocolError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

struct Encoder {
  json operator()(const Hello& h) const { return {{"type", "HELLO"}, {"drone_id", h.drone_id}, {"caps", h.caps}}; }
  json operator()(const Cmd& c) const { return {{"type", "CMD"}, {"id", c.id}, {"name", c.name}, {"args", c.args}}; }
  json operator()(const Ack& a) const {
    json j = {{"type", "ACK"}, {"id", a.id}, {"ok", a.ok}};
    if (!a.reason.empty()) j["reason"] = a.reason;
    return j;
  }
  json operator()(const Telemetry& t) const { return to_json(t); }
  json operator()(const Setpoint& s) const {
    return {{"type", "SETPOINT"}, {"t", s.t}, {"pos", vec(s.position)}, {"yaw", s.yaw}};
  }
};

}  // namespace

json to_json(const Telemetry& t) {
  return {{"type", "TELEM"},
          {"t", t.t},
          {"pos", vec(t.position)},
          {"vel", vec(t.velocity)},
          {"ypr", json::array({t.ypr.yaw, t.ypr.pitch, t.ypr.roll})},
          {"battery", t.battery},
          {"state", std::string(to_string(t.mode))}};
}

Telemetry telemetry_from_json(const json& j) {
  Telemetry t;
  t.t = j.at("t").get<double>();
  t.position = vec(j.at("pos"));
  t.velocity = vec(j.at("vel"));
  const Vec3 e = vec(j.at("ypr"));
  t.ypr = {e[0], e[1], e[2]};
  t.battery = j.at("battery").get<double>();
  const auto mode = parse_flight_mode(j.at("state").get<std::string>());
  if (!mode) throw ProtocolError("unknown state");
  t.mode = *mode;
  return t;
}

std::string encode(const Message& m) {
  std::string out = std::visit(Encoder{}, m).dump();
  out += '\n';
  return out;
}

Message decode(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed frame: ") + e.what());
  }
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "HELLO") {
      Hello h{j.at("drone_id").get<std::string>(), {}};
      if (j.contains("caps")) h.caps = j.at("caps").get<std::vector<std::string>>();
      if (h.drone_id.empty()) throw ProtocolError("empty drone_id");
      return h;
    }
    if (type == "CMD") {
      Cmd c{j.at("id").get<std::uint64_t>(), j.at("name").get<std::string>(), json::object()};
      if (j.contains("args")) c.args = j.at("args");
      return c;
    }
    if (type == "ACK") {
      Ack a{j.at("id").get<std::uint64_t>(), j.at("ok").get<bool>(), {}};
      if (j.contains("reason")) a.reason = j.at("reason").get<std::string>();
      return a;
    }
    if (type == "TELEM") return telemetry_from_json(j);
    if (type == "SETPOINT") {
      return Setpoint{j.at("t").get<double>(), vec(j.at("pos")), j.at("yaw").get<double>()};
    }
    throw ProtocolError("unknown frame type '" + type + "'");
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad frame: ") + e.what());
  }
}

void LineBuffer::append(std::string_view bytes) {
  buf_.append(bytes);
  if (buf_.size() > kMaxLine && buf_.find('\n') == std::string::npos) {
    buf_.clear();
    throw ProtocolError("line too long");
  }
}

bool LineBuffer::next(std::string& line) {
  const auto pos = buf_.find('\n');
  if (pos == std::string::npos) return false;
  line.assign(buf_, 0, pos);
  buf_.erase(0, pos + 1);
  return true;
}

}  // namespace gmp3::wire

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sim/drone.hpp"

namespace gmp3::wire {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Hello {
  std::string drone_id;
  std::vector<std::string> caps;
};

struct Cmd {
  std::uint64_t id = 0;
  std::string name;
  nlohmann::json args = nlohmann::json::object();
};

/// id 0 answers HELLO.
struct Ack {
  std::uint64_t id = 0;
  bool ok = true;
  std::string reason;
};

using Message = std::variant<Hello, Cmd, Ack, Telemetry, Setpoint>;

/// One JSON object per line, terminated by '\n'. Doubles round-trip exactly.
std::string encode(const Message& m);
/// Accepts the line with or without the trailing newline.
Message decode(std::string_view line);

nlohmann::json to_json(const Telemetry& t);
Telemetry telemetry_from_json(const nlohmann::json& j);

/// Accumulates stream bytes and yields complete lines.
class LineBuffer {
 public:
  static constexpr std::size_t kMaxLine = 1 << 20;

  void append(std::string_view bytes);
  /// Pops the next complete line (without '\n'); false when none is buffered.
  bool next(std::string& line);

 private:
  std::string buf_;
};

}  // namespace gmp3::wire

#include "sim/virtual_fleet.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "sim/drone_client.hpp"

namespace gmp3 {

struct VirtualFleet::Node {
  Node(const std::string& id, const Vec3& start, double cap) : vehicle(id, start, cap) {}
  SimVehicle vehicle;
  std::deque<wire::Message> inbox;
  std::vector<Setpoint> setpoints;
  std::vector<wire::Ack> acks;
  std::size_t frames = 0;
  double max_speed = 0.0;
  bool muted = false;
  bool closed = false;
  bool connected = false;
};

class VirtualFleet::Link final : public DroneLink {
 public:
  explicit Link(Node* node) : node_(node) {}
  void send(const wire::Message& m) override {
    if (!node_->closed) node_->inbox.push_back(m);
  }
  void close() override { node_->closed = true; }

 private:
  Node* node_;
};

VirtualFleet::VirtualFleet(StationConfig config, double physics_dt)
    : dt_(physics_dt), station_(std::make_unique<GroundStation>(std::move(config))) {
  if (!(dt_ > 0.0)) throw InvalidArgument("physics dt must be > 0");
}

VirtualFleet::~VirtualFleet() { station_.reset(); }

bool VirtualFleet::add_drone(const std::string& id, const Vec3& start, double speed_cap) {
  if (nodes_.contains(id)) return false;
  auto n = std::make_unique<Node>(id, start, speed_cap);
  Node* raw = n.get();
  nodes_[id] = std::move(n);
  const wire::Ack ack = station_->connect(wire::Hello{id, {"sim"}}, std::make_shared<Link>(raw), now_);
  raw->inbox.clear();
  if (!ack.ok) {
    nodes_.erase(id);
    return false;
  }
  raw->connected = true;
  // Initial telemetry so the station knows the pose before any command.
  station_->on_message(id, sim::telemetry(raw->vehicle.state(), now_), now_);
  ++raw->frames;
  return true;
}

VirtualFleet::Node& VirtualFleet::node(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw NotFound("no simulated drone '" + id + "'");
  return *it->second;
}

const VirtualFleet::Node& VirtualFleet::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw NotFound("no simulated drone '" + id + "'");
  return *it->second;
}

SimVehicle& VirtualFleet::vehicle(const std::string& id) { return node(id).vehicle; }

void VirtualFleet::step() {
  ++step_;
  now_ = static_cast<double>(step_) * dt_;
  const long steps_per_frame = std::max(1L, std::lround(1.0 / (station_->config().telemetry_rate * dt_)));
  std::vector<std::pair<std::string, wire::Message>> outbound;

  for (auto& [id, n] : nodes_) {
    if (!n->connected) continue;
    std::deque<wire::Message> inbox;
    inbox.swap(n->inbox);
    for (const auto& m : inbox) {
      if (const auto* cmd = std::get_if<wire::Cmd>(&m)) {
        const wire::Ack ack = handle_command(n->vehicle, *cmd);
        n->acks.push_back(ack);
        outbound.emplace_back(id, ack);
      } else if (const auto* sp = std::get_if<Setpoint>(&m)) {
        n->setpoints.push_back(*sp);
        n->vehicle.apply_setpoint(*sp);
      }
    }
    if (n->closed) {
      n->connected = false;
      continue;
    }
    n->vehicle.advance(dt_);
    n->max_speed = std::max(n->max_speed, n->vehicle.state().velocity.norm());
    if (step_ % steps_per_frame == 0 && !n->muted) {
      outbound.emplace_back(id, sim::telemetry(n->vehicle.state(), now_));
      ++n->frames;
    }
  }
  for (const auto& [id, m] : outbound) station_->on_message(id, m, now_);
  station_->update(now_);
}

void VirtualFleet::run_for(double seconds) {
  const long steps = std::lround(seconds / dt_);
  for (long i = 0; i < steps; ++i) step();
}

bool VirtualFleet::run_until(const std::function<bool()>& pred, double timeout) {
  const long steps = std::lround(timeout / dt_);
  for (long i = 0; i < steps; ++i) {
    if (pred()) return true;
    step();
  }
  return pred();
}

void VirtualFleet::mute(const std::string& id, bool muted) { node(id).muted = muted; }

void VirtualFleet::disconnect(const std::string& id) {
  Node& n = node(id);
  n.connected = false;
  station_->disconnect(id, now_);
}

const std::vector<Setpoint>& VirtualFleet::setpoints(const std::string& id) const { return node(id).setpoints; }
const std::vector<wire::Ack>& VirtualFleet::acks(const std::string& id) const { return node(id).acks; }
std::size_t VirtualFleet::telemetry_frames(const std::string& id) const { return node(id).frames; }
double VirtualFleet::max_speed(const std::string& id) const { return node(id).max_speed; }
bool VirtualFleet::link_closed(const std::string& id) const { return node(id).closed; }

}  // namespace gmp3

#include "station/plugins.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <sstream>

#include "station/ground_station.hpp"
#include "station/missions.hpp"

namespace gmp3 {

using nlohmann::json;

void PluginContext::add_console_command(const std::string& name, const std::string& help,
                                        ConsoleHandler handler) {
  std::lock_guard lock(manager_->m_);
  static const std::vector<std::string> reserved = {"help", "plugins", "load", "unload"};
  if (std::find(reserved.begin(), reserved.end(), name) != reserved.end() || manager_->commands_.contains(name)) {
    throw PluginError("console command '" + name + "' is already registered");
  }
  manager_->commands_[name] = {owner_, help, std::move(handler)};
  if (auto* r = manager_->record(owner_)) r->commands.push_back(name);
}

void PluginContext::spawn(std::function<void(std::stop_token)> task) {
  std::lock_guard lock(manager_->m_);
  auto* r = manager_->record(owner_);
  if (!r) throw PluginError("plugin '" + owner_ + "' is not loading");
  r->tasks.emplace_back(std::move(task));
}

PluginRegistry::PluginRegistry() {
  factories_["fleet_monitor"] = [](const std::string& name, const json& o) {
    return std::make_unique<FleetMonitorPlugin>(name, o.value("period", 1.0));
  };
  factories_["waypoint_mission"] = [](const std::string& name, const json& o) {
    return std::unique_ptr<Plugin>(WaypointMission::from_json(name, o));
  };
  factories_["observer_swap"] = [](const std::string& name, const json& o) {
    return std::unique_ptr<Plugin>(ObserverSwapMission::from_json(name, o));
  };
}

PluginRegistry& PluginRegistry::instance() {
  static PluginRegistry registry;
  return registry;
}

void PluginRegistry::add(const std::string& type, Factory factory) {
  std::lock_guard lock(m_);
  if (factories_.contains(type)) throw PluginError("plugin type '" + type + "' is already registered");
  factories_[type] = std::move(factory);
}

bool PluginRegistry::contains(const std::string& type) const {
  std::lock_guard lock(m_);
  return factories_.contains(type);
}

std::vector<std::string> PluginRegistry::types() const {
  std::lock_guard lock(m_);
  std::vector<std::string> out;
  for (const auto& [k, v] : factories_) out.push_back(k);
  return out;
}

std::unique_ptr<Plugin> PluginRegistry::create(const std::string& type, const std::string& name,
                                               const json& options) const {
  Factory f;
  {
    std::lock_guard lock(m_);
    auto it = factories_.find(type);
    if (it == factories_.end()) throw PluginError("unknown plugin type '" + type + "'");
    f = it->second;
  }
  try {
    return f(name, options);
  } catch (const PluginError&) {
    throw;
  } catch (const std::exception& e) {
    throw PluginError("cannot create plugin '" + name + "': " + e.what());
  }
}

PluginManager::PluginManager(GroundStation& station) : station_(station) {}

PluginManager::~PluginManager() { unload_all(); }

PluginManager::Record* PluginManager::record(const std::string& name) {
  for (auto& r : records_) {
    if (r.plugin->name() == name) return &r;
  }
  return nullptr;
}

Plugin& PluginManager::load(const std::string& type, const std::string& name, const json& options) {
  const std::string instance = name.empty() ? type : name;
  {
    std::lock_guard lock(m_);
    if (record(instance)) throw PluginError("plugin '" + instance + "' is already loaded");
  }
  return load(PluginRegistry::instance().create(type, instance, options));
}

Plugin& PluginManager::load(std::unique_ptr<Plugin> plugin) {
  if (!plugin) throw PluginError("null plugin");
  std::lock_guard lock(m_);
  const std::string name = plugin->name();
  if (name.empty()) throw PluginError("plugin name must not be empty");
  if (record(name)) throw PluginError("plugin '" + name + "' is already loaded");
  for (const auto& dep : plugin->dependencies()) {
    if (!record(dep)) throw PluginError("plugin '" + name + "' requires '" + dep + "' to be loaded first");
  }
  records_.push_back({std::move(plugin), {}, {}});
  PluginContext ctx(station_, *this, name);
  try {
    records_.back().plugin->on_load(ctx);
  } catch (...) {
    auto& r = records_.back();
    for (auto& t : r.tasks) t.request_stop();
    r.tasks.clear();
    for (const auto& c : r.commands) commands_.erase(c);
    records_.pop_back();
    throw;
  }
  return *records_.back().plugin;
}

void PluginManager::unload(const std::string& name) {
  std::lock_guard lock(m_);
  auto it = std::find_if(records_.begin(), records_.end(), [&](const Record& r) { return r.plugin->name() == name; });
  if (it == records_.end()) throw PluginError("plugin '" + name + "' is not loaded");
  for (const auto& r : records_) {
    const auto deps = r.plugin->dependencies();
    if (std::find(deps.begin(), deps.end(), name) != deps.end()) {
      throw PluginError("plugin '" + name + "' is required by '" + r.plugin->name() + "'");
    }
  }
  for (auto& t : it->tasks) t.request_stop();
  it->tasks.clear();  // joins
  for (const auto& c : it->commands) commands_.erase(c);
  it->plugin->on_unload();
  records_.erase(it);
}

void PluginManager::unload_all() {
  std::lock_guard lock(m_);
  while (!records_.empty()) unload(records_.back().plugin->name());
}

bool PluginManager::loaded(const std::string& name) const { return find(name) != nullptr; }

Plugin* PluginManager::find(const std::string& name) const {
  std::lock_guard lock(m_);
  for (const auto& r : records_) {
    if (r.plugin->name() == name) return r.plugin.get();
  }
  return nullptr;
}

std::vector<std::string> PluginManager::names() const {
  std::lock_guard lock(m_);
  std::vector<std::string> out;
  for (const auto& r : records_) out.push_back(r.plugin->name());
  return out;
}

std::vector<std::string> PluginManager::console_commands() const {
  std::lock_guard lock(m_);
  std::vector<std::string> out;
  for (const auto& [k, v] : commands_) out.push_back(k);
  return out;
}

void PluginManager::update(double now) {
  std::lock_guard lock(m_);
  for (std::size_t i = 0; i < records_.size(); ++i) records_[i].plugin->update(now);
}

std::string PluginManager::console(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  if (words.empty()) throw PluginError("empty command");
  const std::string cmd = words.front();
  const std::vector<std::string> args(words.begin() + 1, words.end());

  if (cmd == "help") {
    std::string out = "help\nplugins\nload <type> [name] [options-json]\nunload <name>\n";
    std::lock_guard lock(m_);
    for (const auto& [k, v] : commands_) out += k + " - " + v.help + "\n";
    return out;
  }
  if (cmd == "plugins") {
    std::string out;
    std::lock_guard lock(m_);
    for (const auto& r : records_) out += r.plugin->name() + " (" + r.plugin->type() + ")\n";
    return out;
  }
  if (cmd == "load") {
    if (args.empty()) throw PluginError("usage: load <type> [name] [options-json]");
    json options = json::object();
    if (args.size() > 2) {
      const auto pos = line.find(args[2]);
      try {
        options = json::parse(line.substr(pos));
      } catch (const json::parse_error& e) {
        throw PluginError(std::string("bad options: ") + e.what());
      }
    }
    Plugin& p = load(args[0], args.size() > 1 ? args[1] : std::string{}, options);
    return "loaded " + p.name() + "\n";
  }
  if (cmd == "unload") {
    if (args.size() != 1) throw PluginError("usage: unload <name>");
    unload(args[0]);
    return "unloaded " + args[0] + "\n";
  }

  PluginContext::ConsoleHandler handler;
  {
    std::lock_guard lock(m_);
    auto it = commands_.find(cmd);
    if (it == commands_.end()) throw PluginError("unknown command '" + cmd + "'");
    handler = it->second.handler;
  }
  return handler(args);
}

FleetMonitorPlugin::FleetMonitorPlugin(std::string name, double period_s)
    : Plugin(std::move(name)), period_(period_s) {
  if (!(period_ > 0.0)) throw PluginError("fleet_monitor period must be > 0");
}

void FleetMonitorPlugin::on_load(PluginContext& ctx) {
  station_ = &ctx.station();
  ctx.add_console_command("fleet", "one line per connected drone", [this](const std::vector<std::string>&) {
    std::lock_guard lock(m_);
    std::string out;
    for (const auto& d : summary_) {
      out += d.at("id").get<std::string>() + " " + d.at("mode").get<std::string>() + " battery " +
             std::to_string(d.at("battery").get<double>()) + (d.at("lost").get<bool>() ? " LOST" : "") + "\n";
    }
    return out;
  });
  EventBus* events = &station_->events();
  ctx.spawn([this, events](std::stop_token stop) {
    std::mutex wait_m;
    std::condition_variable_any cv;
    const auto period = std::chrono::duration<double>(period_);
    while (!stop.stop_requested()) {
      {
        std::unique_lock lk(wait_m);
        cv.wait_for(lk, stop, period, [] { return false; });
      }
      if (stop.stop_requested()) break;
      json frame;
      {
        std::lock_guard lock(m_);
        ++heartbeats_;
        frame = {{"type", "fleet"}, {"source", name()}, {"drones", summary_}};
      }
      events->publish(frame);
    }
  });
}

void FleetMonitorPlugin::update(double) {
  json summary = json::array();
  for (const auto& d : station_->drone_ids()) {
    const auto info = station_->drone_info(d);
    if (!info) continue;
    summary.push_back({{"id", d},
                       {"mode", std::string(to_string(info->mode))},
                       {"battery", info->battery},
                       {"lost", info->lost}});
  }
  std::lock_guard lock(m_);
  summary_ = std::move(summary);
}

json FleetMonitorPlugin::status() const {
  std::lock_guard lock(m_);
  return {{"drones", summary_}, {"heartbeats", heartbeats_}};
}

std::size_t FleetMonitorPlugin::heartbeats() const {
  std::lock_guard lock(m_);
  return heartbeats_;
}

}  // namespace gmp3

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stop_token>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

namespace gmp3 {

class GroundStation;
class PluginManager;

class PluginError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Handed to a plugin while it loads; everything registered through it is
/// torn down again on unload.
class PluginContext {
 public:
  using ConsoleHandler = std::function<std::string(const std::vector<std::string>& args)>;

  GroundStation& station() { return *station_; }
  /// Fails when another plugin already owns the command name.
  void add_console_command(const std::string& name, const std::string& help, ConsoleHandler handler);
  /// Background task; receives a stop request on unload and is joined.
  void spawn(std::function<void(std::stop_token)> task);

 private:
  friend class PluginManager;
  PluginContext(GroundStation& station, PluginManager& manager, std::string owner)
      : station_(&station), manager_(&manager), owner_(std::move(owner)) {}

  GroundStation* station_;
  PluginManager* manager_;
  std::string owner_;
};

class Plugin {
 public:
  explicit Plugin(std::string name) : name_(std::move(name)) {}
  virtual ~Plugin() = default;

  const std::string& name() const { return name_; }
  virtual std::string type() const = 0;
  /// Names of plugin instances that must already be loaded.
  virtual std::vector<std::string> dependencies() const { return {}; }

  virtual void on_load(PluginContext&) {}
  virtual void on_unload() {}
  /// Called from the station dispatcher (station lock held).
  virtual void update(double /*now*/) {}
  virtual nlohmann::json status() const { return nlohmann::json::object(); }

 private:
  std::string name_;
};

/// Static registry of plugin types.
class PluginRegistry {
 public:
  using Factory = std::function<std::unique_ptr<Plugin>(const std::string& name, const nlohmann::json& options)>;

  static PluginRegistry& instance();

  void add(const std::string& type, Factory factory);
  bool contains(const std::string& type) const;
  std::vector<std::string> types() const;
  std::unique_ptr<Plugin> create(const std::string& type, const std::string& name,
                                 const nlohmann::json& options) const;

 private:
  PluginRegistry();
  mutable std::mutex m_;
  std::map<std::string, Factory> factories_;
};

class PluginManager {
 public:
  explicit PluginManager(GroundStation& station);
  ~PluginManager();

  PluginManager(const PluginManager&) = delete;
  PluginManager& operator=(const PluginManager&) = delete;

  /// Instantiates a registered type under a unique instance name (defaults
  /// to the type name). Throws PluginError on duplicate names, unknown types
  /// or dependencies that are not loaded.
  Plugin& load(const std::string& type, const std::string& name = {},
               const nlohmann::json& options = nlohmann::json::object());
  /// Loads an already constructed plugin (programmatic use).
  Plugin& load(std::unique_ptr<Plugin> plugin);
  /// Throws PluginError when unknown or still depended upon.
  void unload(const std::string& name);
  void unload_all();

  bool loaded(const std::string& name) const;
  Plugin* find(const std::string& name) const;
  std::vector<std::string> names() const;
  std::vector<std::string> console_commands() const;

  void update(double now);

  /// Built-ins: help, plugins, load <type> [name] [options-json], unload <name>;
  /// then any command registered by a plugin.
  std::string console(const std::string& line);

 private:
  friend class PluginContext;
  struct Command {
    std::string owner;
    std::string help;
    PluginContext::ConsoleHandler handler;
  };
  struct Record {
    std::unique_ptr<Plugin> plugin;
    std::vector<std::jthread> tasks;
    std::vector<std::string> commands;
  };

  GroundStation& station_;
  mutable std::recursive_mutex m_;
  std::vector<Record> records_;  // load order
  std::map<std::string, Command> commands_;

  Record* record(const std::string& name);
};

/// Baseline plugin the mission plugins depend on. Tracks per-drone
/// connection/battery summaries and publishes a periodic "fleet" event from a
/// background task.
class FleetMonitorPlugin final : public Plugin {
 public:
  FleetMonitorPlugin(std::string name, double period_s);

  std::string type() const override { return "fleet_monitor"; }
  void on_load(PluginContext& ctx) override;
  void update(double now) override;
  nlohmann::json status() const override;

  std::size_t heartbeats() const;

 private:
  double period_;
  GroundStation* station_ = nullptr;
  mutable std::mutex m_;
  nlohmann::json summary_ = nlohmann::json::array();
  std::size_t heartbeats_ = 0;
};

}  // namespace gmp3

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/planner.hpp"
#include "core/trajectory.hpp"

namespace gmp3 {

/// Keys: start{xyz,ypr}, goal{xyz,ypr}, obstacles[{center,radius}],
/// bounds{min,max}, weights{Q_diag,mu,lambda}.
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

std::vector<std::string> profile_names();

/// "default", "paper_sec5" or "paper_rmsprop"; throws InvalidArgument otherwise.
PlannerConfig profile_config(std::string_view name);

/// Applies a (possibly partial) config document on top of base. A top-level
/// "profile" key selects the base first. Nested objects and dotted keys
/// ("optimizer.eta") are both accepted.
PlannerConfig apply_config_json(PlannerConfig base, const nlohmann::json& doc);
PlannerConfig load_config(const std::filesystem::path& path, PlannerConfig base = {});
nlohmann::json config_to_json(const PlannerConfig& config);

/// Sets one dotted key from its textual value ("0.1", "true", "adam", "0.89,0.89,0.89").
void set_config_value(PlannerConfig& config, std::string_view key, std::string_view value);

/// Every key accepted by set_config_value.
const std::vector<std::string>& config_keys();

}  // namespace gmp3

#pragma once

#include <filesystem>
#include <string>

#include "core/planner.hpp"

namespace gmp3 {

/// %.9g with negative zero printed as 0.
std::string format_number(double v);

/// Header t,x,y,z,roll,pitch,yaw then one row per sample.
std::string trajectory_csv(const SampledTrajectory& traj);

/// Header iteration,loss,violation,normalized_loss then one row per iteration (1-based).
std::string metrics_csv(const PlanResult& result);

/// Writes both CSVs; throws IoError when a file cannot be written.
void export_result(const PlanResult& result, const std::filesystem::path& trajectory_path,
                   const std::filesystem::path& metrics_path);

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace gmp3

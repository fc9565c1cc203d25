#include "core/export.hpp"

#include <cstdio>
#include <fstream>

#include "core/errors.hpp"

namespace gmp3 {

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string trajectory_csv(const SampledTrajectory& traj) {
  std::string out = "t,x,y,z,roll,pitch,yaw\n";
  for (std::size_t j = 0; j < traj.poses.size(); ++j) {
    const auto& p = traj.poses[j];
    const EulerAngles e = se3::rot_to_euler(p.rotation);
    for (double v : {traj.timestamps[j], p.position.x(), p.position.y(), p.position.z(), e.roll, e.pitch}) {
      out += format_number(v);
      out += ',';
    }
    out += format_number(e.yaw);
    out += '\n';
  }
  return out;
}

std::string metrics_csv(const PlanResult& result) {
  std::string out = "iteration,loss,violation,normalized_loss\n";
  for (std::size_t k = 0; k < result.loss_history.size(); ++k) {
    out += std::to_string(k + 1) + ',' + format_number(result.loss_history[k]) + ',' +
           format_number(result.violation_history[k]) + ',' + format_number(result.normalized_loss_history[k]) +
           '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void export_result(const PlanResult& result, const std::filesystem::path& trajectory_path,
                   const std::filesystem::path& metrics_path) {
  write_text(trajectory_path, trajectory_csv(result.trajectory));
  write_text(metrics_path, metrics_csv(result));
}

}  // namespace gmp3

// Acceptance checks: one PASS/FAIL line per criterion.
// usage: acceptance <path-to-gmp3-cli> <scenario-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "core/config_io.hpp"
#include "core/consensus.hpp"
#include "core/optimizers.hpp"
#include "core/planner.hpp"
#include "core/se3.hpp"
#include "core/trajectory.hpp"
#include "oracle/loss_oracle.hpp"
#include "sim/virtual_fleet.hpp"
#include "station/flow.hpp"
#include "station/ground_station.hpp"
#include "station/missions.hpp"

using namespace gmp3;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void guarded(const char* name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void lie_group() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> mag(0.0, 3.1), dts(0.01, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double dt = dts(rng);
    const Vec3 axis = Vec3(n(rng), n(rng), n(rng)).normalized();
    Twist xi;
    xi.angular = axis * (mag(rng) / dt);
    xi.linear = Vec3(n(rng), n(rng), n(rng));
    const Pose p = se3::exp_se3(xi, dt);
    const Vec3 phi = se3::log_so3(p.rotation);
    const Vec3 rho = se3::left_jacobian(phi).lu().solve(p.position);
    worst = std::max({worst, (phi - xi.angular * dt).norm(), (rho - xi.linear * dt).norm()});
  }
  double geo = 0.0;
  for (int i = 1; i <= 30; ++i) {
    const double theta = 0.1 * i;
    geo = std::max(geo, std::abs(se3::geodesic_distance(Mat3::Identity(), se3::rot_z(theta)) - theta));
  }
  const double secs = seconds_since(t0);
  report("lie_group", worst < 1e-9 && geo < 1e-9 && secs < 1.0,
         fmt("round-trip max err %.3g, geodesic max err %.3g, %.3f s", worst, geo, secs));
}

void loss_oracle() {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-3, 3), ang(-1.3, 1.3);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    SampledTrajectory t;
    t.dt = 0.1;
    std::vector<Vec3> pts;
    std::vector<Mat3> rots;
    for (int j = 0; j < 5; ++j) {
      Pose p;
      p.position = Vec3(u(rng), u(rng), u(rng));
      p.rotation = se3::euler_to_rot({ang(rng), ang(rng) / 2, ang(rng)});
      t.poses.push_back(p);
      t.timestamps.push_back(0.1 * j);
      pts.push_back(p.position);
      rots.push_back(p.rotation);
    }
    LossWeights w;
    Eigen::Matrix3d a = Eigen::Matrix3d::Random();
    w.q = a * a.transpose() + 0.5 * Mat3::Identity();
    w.mu = 0.05 + std::abs(u(rng)) / 10;
    w.lambda = std::abs(u(rng));
    std::vector<Obstacle> obs;
    std::vector<oracle::Sphere> spheres;
    for (int o = 0; o < 3; ++o) {
      const Vec3 c(u(rng), u(rng), u(rng));
      const double r = 0.5 + std::abs(u(rng));
      obs.push_back({c, r});
      spheres.push_back({c, r});
    }
    const double want = oracle::total_loss(pts, rots, spheres, w.q, w.mu, w.lambda);
    worst = std::max(worst, std::abs(loss(t, obs, w).total - want) / std::max(1.0, std::abs(want)));
  }
  report("loss_oracle", worst <= 1e-12, fmt("max scaled deviation %.3g over 100 trajectories", worst));
}

void fd_order() {
  const Objective f = [](const Eigen::VectorXd& x) { return std::sin(x(0)) * std::exp(0.5 * x(0)); };
  const double x0 = 0.7;
  const double exact = std::cos(x0) * std::exp(0.5 * x0) + 0.5 * std::sin(x0) * std::exp(0.5 * x0);
  auto err = [&](FdKind k, double d) {
    return std::abs(fd_gradient(f, Eigen::VectorXd::Constant(1, x0), {k, d})(0) - exact);
  };
  const double r5 = err(FdKind::kFivePoint, 0.1) / err(FdKind::kFivePoint, 0.05);
  const double r2 = err(FdKind::kTwoPoint, 0.1) / err(FdKind::kTwoPoint, 0.05);
  report("fd_order", r5 >= 8 && r5 <= 32 && r2 >= 3.5 && r2 <= 4.5,
         fmt("five-point ratio %.3f, two-point ratio %.3f", r5, r2));
}

void optimizers() {
  struct Case {
    OptimizerKind kind;
    double grad;
    int steps;
    double want;
  };
  const std::vector<Case> cases = {{OptimizerKind::kMgd, 2.0, 2, -3.8},
                                   {OptimizerKind::kAdaGrad, 3.0, 1, -1.0},
                                   {OptimizerKind::kRmsProp, 1.0, 1, -3.16227766},
                                   {OptimizerKind::kAdaDelta, 1.0, 1, -0.004472},
                                   {OptimizerKind::kAdam, 1.0, 1, -1.0}};
  double worst = 0.0;
  for (const auto& c : cases) {
    auto k = default_constants(c.kind);
    k.eta = 1.0;
    OptimizerState s(c.kind, k, 1);
    double d = 0.0;
    for (int i = 0; i < c.steps; ++i) d = s.step(Eigen::VectorXd::Constant(1, c.grad))(0);
    worst = std::max(worst, std::abs(d - c.want));
  }
  const Eigen::Vector3d target(1, -2, 0.5);
  int slowest = 0;
  bool all = true;
  for (auto kind : kAllOptimizers) {
    OptimizerState s(kind, default_constants(kind), 3);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    int steps = 0;
    while ((x - target).norm() >= 1e-2 && steps < 2000) {
      x += s.step(2.0 * (x - target));
      ++steps;
    }
    all = all && (x - target).norm() < 1e-2;
    slowest = std::max(slowest, steps);
  }
  report("optimizer_first_steps", worst <= 1e-6 && all,
         fmt("max first-step deviation %.3g, bowl converged %.0f, slowest %.0f steps", worst, all ? 1.0 : 0.0, slowest));
}

void bellman() {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-10, 10), l(0, 5);
  DiscreteInstance inst;
  inst.states = 6;
  inst.agent_actions = {2, 2};
  inst.loss.assign(6, std::vector<double>(4));
  inst.next.assign(6, std::vector<std::size_t>(4));
  for (std::size_t s = 0; s < 6; ++s) {
    for (std::size_t a = 0; a < 4; ++a) {
      inst.loss[s][a] = l(rng);
      inst.next[s][a] = rng() % 6;
    }
  }
  bool ok = true;
  std::string detail;
  for (double gamma : {0.2, 0.9}) {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      std::vector<double> v1(6), v2(6);
      for (int s = 0; s < 6; ++s) {
        v1[s] = u(rng);
        v2[s] = u(rng);
      }
      const auto t1 = bellman_apply(v1, inst, gamma), t2 = bellman_apply(v2, inst, gamma);
      double num = 0.0, den = 0.0;
      for (int s = 0; s < 6; ++s) {
        num = std::max(num, std::abs(t1[s] - t2[s]));
        den = std::max(den, std::abs(v1[s] - v2[s]));
      }
      worst = std::max(worst, num / den);
    }
    ok = ok && worst <= gamma + 1e-12;
    detail += fmt("gamma %.1f factor %.6f; ", gamma, worst);
  }
  report("bellman_contraction", ok, detail);
}

void obstacle_field(const fs::path& dir) {
  const Scenario s = load_scenario(dir / "paper_sec5.json");
  PlannerConfig cfg = profile_config("paper_sec5");
  cfg.optimizer = OptimizerKind::kRmsProp;
  cfg.max_iterations = 30;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = plan(s, cfg);
  const double secs = seconds_since(t0);

  const std::size_t n = cfg.resolved_samples();
  std::vector<Vec3> chord;
  for (std::size_t j = 0; j <= n; ++j) {
    chord.push_back(s.start.position + (s.goal.position - s.start.position) * (static_cast<double>(j) / n));
  }
  std::vector<oracle::Sphere> spheres;
  for (const auto& o : s.obstacles) spheres.push_back({o.center, o.radius});
  const double nu0 = oracle::proximity(chord, spheres);

  report("obstacle_field_a_loss", !r.failed && r.best_loss < r.initial_loss,
         fmt("best %.9g < initial %.9g", r.best_loss, r.initial_loss));
  report("obstacle_field_b_violation", !r.failed && r.final_violation <= 0.2 * nu0,
         fmt("final %.6g <= 0.2 x oracle chord %.6g", r.final_violation, nu0));
  const auto& poses = r.trajectory.poses;
  const bool ends = !poses.empty() && poses.front().position == s.start.position &&
                    poses.back().position == s.goal.position;
  report("obstacle_field_c_endpoints", ends, ends ? "exact" : "endpoint mismatch");
  report("obstacle_field_d_wall_time", secs < 10.0, fmt("%.3f s for %.0f iterations", secs, r.iterations_used));

  cfg.influence_aware = false;
  const auto off = plan(s, cfg);
  report("obstacle_field_influence_off", !off.failed && off.loss_history.size() == r.loss_history.size() &&
                                             off.violation_history.size() == r.violation_history.size(),
         fmt("best %.9g with %.0f history rows (influence on: %.0f)", off.best_loss,
             static_cast<double>(off.loss_history.size()), static_cast<double>(r.loss_history.size())));
}

void determinism(const std::string& cli, const fs::path& dir) {
  const fs::path root = fs::temp_directory_path() / ("gmp3_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  bool ok = true;
  for (const char* sub : {"a", "b"}) {
    const std::string cmd = "\"" + cli + "\" run \"" + (dir / "paper_sec5.json").string() +
                            "\" --profile paper_sec5 --out-dir \"" + (root / sub).string() + "\" > /dev/null";
    ok = ok && std::system(cmd.c_str()) == 0;
  }
  std::string detail;
  for (const char* f : {"trajectory.csv", "metrics.csv"}) {
    const std::string a = slurp(root / "a" / f), b = slurp(root / "b" / f);
    const bool same = !a.empty() && a == b;
    ok = ok && same;
    detail += std::string(f) + (same ? " identical (" + std::to_string(a.size()) + " bytes); " : " differs; ");
  }
  fs::remove_all(root);
  report("determinism", ok, detail);
}

CommandRequest cmd(const std::string& name, json args = json::object()) { return {name, std::move(args)}; }

void station_suite(const fs::path& dir) {
  guarded("gs_fifo", [] {
    VirtualFleet f;
    const std::vector<std::string> ids = {"a", "b", "c"};
    for (std::size_t i = 0; i < ids.size(); ++i) f.add_drone(ids[i], Vec3(-2.0 + 2.0 * i, 0, 0));
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> off(-0.4, 0.4);
    std::map<std::string, std::vector<std::uint64_t>> expected, executed;
    std::map<std::string, int> phase;
    int accepted = 0;
    for (int issued = 0; issued < 100; ++issued) {
      const std::string& id = ids[rng() % ids.size()];
      const Vec3 home = f.vehicle(id).launch_point();
      CommandRequest c;
      switch (phase[id]++ % 6) {
        case 0: c = cmd("arm"); break;
        case 1: c = cmd("takeoff", {{"altitude", 0.5}}); break;
        case 2: c = cmd("goto", {{"x", home.x() + off(rng)}, {"y", home.y() + off(rng)}, {"z", 0.6}}); break;
        case 3: c = cmd("move_by", {{"dx", off(rng)}, {"dy", off(rng)}, {"dz", 0.1}}); break;
        case 4: c = cmd("land"); break;
        default: c = cmd("disarm"); break;
      }
      const auto r = f.station().enqueue(id, c, f.now());
      if (r.ok) {
        ++accepted;
        expected[id].push_back(r.id);
      }
      if (rng() % 4 == 0) f.run_for(0.1);
    }
    const bool drained = f.run_until([&] {
      for (const auto& id : ids) if (!f.station().idle(id)) return false;
      return true;
    }, 600.0);
    for (const auto& e : f.station().execution_log()) executed[e.drone_id].push_back(e.id);
    report("gs_fifo", accepted == 100 && drained && executed == expected,
           fmt("%.0f/100 accepted, drained %.0f, per-drone order preserved %.0f", accepted, drained,
               executed == expected));
  });

  guarded("gs_geofence_grid", [] {
    const GeoFence fence(Vec3(-5, -5, 0), Vec3(5, 5, 5));
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> cell(-80, 80);
    int in = 0, out = 0, wrong = 0;
    for (int k = 0; k < 10000; ++k) {
      const Vec3 p(cell(rng) / 8.0, cell(rng) / 8.0, cell(rng) / 8.0);
      const bool inside = p.x() >= -5 && p.x() <= 5 && p.y() >= -5 && p.y() <= 5 && p.z() >= 0 && p.z() <= 5;
      (inside ? in : out)++;
      if (fence.contains(p) != inside) ++wrong;
    }
    report("gs_geofence_grid", wrong == 0, fmt("%.0f in-bounds, %.0f out-of-bounds, %.0f misclassified", in, out, wrong));
  });

  guarded("gs_waypoint_query", [] {
    SampledTrajectory plan;
    plan.dt = 0.2;
    for (int j = 0; j <= 5; ++j) {
      Pose p;
      p.position = Vec3(j, 0, 0);
      plan.poses.push_back(p);
      plan.timestamps.push_back(0.2 * j);
    }
    const bool ok = waypoint_query(plan, 0.0).index == 0 && waypoint_query(plan, 0.5).index == 2 &&
                    waypoint_query(plan, 1e6).index == 5 && waypoint_query(plan, 0.5).position == Vec3(2, 0, 0) &&
                    waypoint_query(plan, 1e6).position == Vec3(5, 0, 0);
    report("gs_waypoint_query", ok, "t=0 -> 0, t=0.5 -> 2, t=1e6 -> last");
  });

  guarded("gs_obstacle_field_goto", [&] {
    const Scenario field = load_scenario(dir / "paper_sec5.json");
    StationConfig cfg = StationConfig::defaults();
    cfg.fence = GeoFence(field.bounds.min, field.bounds.max);
    cfg.environment = field;
    cfg.generator = "gmp3";
    cfg.inline_planning = true;
    VirtualFleet f(cfg);
    f.add_drone("d1", field.start.position - Vec3(0, 0, 1));
    f.station().enqueue("d1", cmd("arm"), f.now());
    f.station().enqueue("d1", cmd("takeoff", {{"altitude", 1.0}}), f.now());
    f.run_until([&] { return f.station().idle("d1"); }, 30.0);
    const std::size_t before = f.setpoints("d1").size();
    const auto r = f.station().enqueue("d1", cmd("goto", {{"x", 10}, {"y", 10}, {"z", 0}}), f.now());
    const bool done = r.ok && f.run_until([&] { return f.station().idle("d1"); }, 200.0);
    const Vec3 goal(10, 10, 0);
    const double miss = (f.vehicle("d1").state().pose.position - goal).norm();
    std::size_t outside = 0;
    for (std::size_t i = before; i < f.setpoints("d1").size(); ++i) {
      if (!cfg.fence.contains(f.setpoints("d1")[i].position)) ++outside;
    }
    const double vmax = f.max_speed("d1");
    const std::size_t emitted = f.setpoints("d1").size() - before;
    report("gs_obstacle_field_goto",
           done && miss <= cfg.arrive_tolerance && outside == 0 && emitted > 1 && vmax <= 0.25 + 1e-9,
           fmt("%.0f setpoints, %.0f outside fence, max speed %.12f m/s", emitted, outside, vmax) +
               fmt(", arrival miss %.3g m at t=%.1f s", miss, f.now()));
  });

  guarded("gs_telemetry_cadence", [] {
    VirtualFleet f;
    f.add_drone("d1", Vec3::Zero());
    const std::size_t before = f.station().drone_info("d1")->telemetry_frames;
    f.run_for(10.0);
    const double frames = static_cast<double>(f.station().drone_info("d1")->telemetry_frames - before);
    report("gs_telemetry_cadence", frames >= 49 && frames <= 51, fmt("%.0f frames in 10 s", frames));
  });
}

json two_stage() {
  return {{"drones", {"d1", "d2"}},
          {"altitude", 1.0},
          {"stages",
           {{{"name", "S1"}, {"targets", {{"d1", {0.0, 1.0, 1.0}}, {"d2", {1.0, 1.0, 1.0}}}}},
            {{"name", "S2"}, {"targets", {{"d1", {0.0, 2.0, 1.5}}, {"d2", {1.0, 2.0, 1.5}}}}}}}};
}

void missions() {
  guarded("mission_two_stage", [] {
    bool ok = true;
    std::string detail;
    for (const std::string stop_at : {"", "Ready", "S1", "S2"}) {
      VirtualFleet f;
      f.add_drone("d1", Vec3::Zero());
      f.add_drone("d2", Vec3(1, 0, 0));
      f.station().plugins().load("fleet_monitor");
      auto& m = dynamic_cast<Mission&>(f.station().plugins().load("waypoint_mission", "m", two_stage()));
      if (stop_at != "Ready") {
        m.start(f.now());
        if (!stop_at.empty()) {
          f.run_until([&] { return m.stage() == stop_at; }, 100.0);
          f.run_for(1.0);
        }
      }
      if (!stop_at.empty()) m.stop(f.now());
      f.run_until([&] { return m.state() == Mission::State::kComplete; }, 300.0);
      std::vector<std::string> want;
      if (stop_at.empty() || stop_at == "S2") want = {"Ready", "S1", "S2", "ReturnToLaunch", "Complete"};
      if (stop_at == "S1") want = {"Ready", "S1", "ReturnToLaunch", "Complete"};
      if (stop_at == "Ready") want = {"ReturnToLaunch", "Complete"};
      const bool landed = f.vehicle("d1").state().mode != FlightMode::kAirborne &&
                          f.vehicle("d2").state().mode != FlightMode::kAirborne;
      const bool good = m.history() == want && landed;
      ok = ok && good;
      std::string h;
      for (const auto& s : m.history()) h += (h.empty() ? "" : ">") + s;
      detail += (stop_at.empty() ? std::string("full") : "stop@" + stop_at) + " " + h + "; ";
    }
    report("mission_two_stage", ok, detail);
  });

  guarded("mission_observer_swap", [] {
    VirtualFleet f;
    f.add_drone("a", Vec3(-2, 0, 0));
    f.add_drone("b", Vec3(0, -2, 0));
    f.add_drone("c", Vec3(2, 0, 0));
    f.vehicle("a").set_battery(0.9);
    f.vehicle("b").set_battery(0.8);
    f.vehicle("c").set_battery(0.95);
    f.run_for(0.5);
    f.station().plugins().load("fleet_monitor");
    auto& m = dynamic_cast<ObserverSwapMission&>(f.station().plugins().load(
        "observer_swap", "obs", {{"drones", {"a", "b", "c"}}, {"station", {0.0, 0.0, 1.0}}, {"threshold", 0.3}}));
    m.start(f.now());
    const std::string first = m.observer();
    f.run_until([&] { return m.stage() == "Observe"; }, 100.0);
    f.run_for(2.0);
    const std::size_t early = m.swaps();
    f.vehicle("c").set_battery(0.2);
    const bool swapped = f.run_until([&] { return m.swaps() == 1; }, 5.0);
    f.run_until([&] { return m.stage() == "Observe" && f.vehicle("c").state().mode != FlightMode::kAirborne; }, 200.0);
    const bool on_post = (f.vehicle("a").state().pose.position - Vec3(0, 0, 1)).norm() <= 0.05;
    report("mission_observer_swap", first == "c" && early == 0 && swapped && m.observer() == "a" && on_post,
           "observer " + first + " -> " + m.observer() + ", swaps " + std::to_string(m.swaps()) +
               (on_post ? ", replacement on post" : ", replacement not on post"));
  });
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <gmp3-cli> <scenario-dir>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path dir = argv[2];

  guarded("lie_group", lie_group);
  guarded("loss_oracle", loss_oracle);
  guarded("fd_order", fd_order);
  guarded("optimizer_first_steps", optimizers);
  guarded("bellman_contraction", bellman);
  guarded("obstacle_field", [&] { obstacle_field(dir); });
  guarded("determinism", [&] { determinism(cli, dir); });
  station_suite(dir);
  missions();

  std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/config_io.hpp"
#include "core/errors.hpp"
#include "core/export.hpp"
#include "core/planner.hpp"

using namespace gmp3;

namespace {

Scenario field() { return load_scenario(GMP3_SCENARIO_DIR "/paper_sec5.json"); }
Scenario open_field() { return load_scenario(GMP3_SCENARIO_DIR "/open_field.json"); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Stopping, Examples) {
  const std::vector<double> flat = {5.0, 5.0};
  EXPECT_TRUE(stopping(flat, 1e-3, 100));
  std::vector<double> falling = {1.0};
  for (int i = 0; i < 5; ++i) falling.push_back(falling.back() * 0.9);
  EXPECT_FALSE(stopping(falling, 1e-6, 100));
  EXPECT_TRUE(stopping(falling, 1e-6, 5));
}

TEST(NormalizedLoss, Examples) {
  const std::vector<double> h = {10, 6, 2};
  const auto n = normalized_loss(h);
  ASSERT_EQ(n.size(), 3u);
  EXPECT_EQ(n[0], 1.0);
  EXPECT_EQ(n[1], 0.5);
  EXPECT_EQ(n[2], 0.0);
  const std::vector<double> c = {3, 3, 3};
  for (double v : normalized_loss(c)) EXPECT_EQ(v, 0.0);
}

TEST(Plan, ObstacleFreeStaysStraight) {
  PlannerConfig cfg = profile_config("paper_sec5");
  const auto r = plan(open_field(), cfg);
  EXPECT_FALSE(r.failed);
  for (double v : r.violation_history) EXPECT_EQ(v, 0.0);
  for (std::size_t i = 1; i < r.loss_history.size(); ++i) EXPECT_LE(r.loss_history[i], r.loss_history[i - 1]);
  EXPECT_LE(std::abs(r.best_loss - r.initial_loss), 1e-9);
}

TEST(Plan, ObstacleFieldImproves) {
  const auto r = plan(field(), profile_config("paper_sec5"));
  ASSERT_FALSE(r.failed);
  EXPECT_EQ(r.iterations_used, 30u);
  EXPECT_EQ(r.loss_history.size(), 30u);
  EXPECT_EQ(r.violation_history.size(), 30u);
  EXPECT_EQ(r.normalized_loss_history.size(), 30u);
  EXPECT_LT(r.best_loss, r.initial_loss);
  EXPECT_LT(r.final_violation, r.initial_violation);
  EXPECT_EQ(r.best_loss, *std::min_element(r.loss_history.begin(), r.loss_history.end()));
}

TEST(Plan, TrajectoryReproducesBestLoss) {
  const Scenario s = field();
  const PlannerConfig cfg = profile_config("paper_sec5");
  const auto r = plan(s, cfg);
  const auto e = evaluate(s, r.best_theta, cfg.resolved_samples(), cfg.dt, cfg.weights.apply(s.weights));
  EXPECT_NEAR(e.loss.total, r.best_loss, 1e-9);
  EXPECT_EQ(r.trajectory.poses.front().position, s.start.position);
  EXPECT_EQ(r.trajectory.poses.back().position, s.goal.position);
}

TEST(Plan, InfluenceOffStillValid) {
  PlannerConfig cfg = profile_config("paper_sec5");
  cfg.influence_aware = false;
  const auto r = plan(field(), cfg);
  EXPECT_FALSE(r.failed);
  EXPECT_EQ(r.loss_history.size(), r.iterations_used);
  EXPECT_LE(r.best_loss, r.initial_loss);
}

TEST(Plan, BitIdenticalRepeats) {
  const auto a = plan(field(), profile_config("paper_rmsprop"));
  const auto b = plan(field(), profile_config("paper_rmsprop"));
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(a.best_theta.params(), b.best_theta.params());
}

TEST(Plan, NoObstaclesNoRotationWeightDoesNotDrift) {
  Scenario s = open_field();
  s.weights.mu = 0.0;
  PlannerConfig cfg = profile_config("paper_sec5");
  const auto r = plan(s, cfg);
  for (double l : r.sweep_loss_history) EXPECT_LE(std::abs(l - r.initial_loss), 1e-9);
}

TEST(Plan, ObserverCancels) {
  const auto r = plan(field(), profile_config("paper_sec5"), [](std::size_t k, double) { return k < 3; });
  EXPECT_TRUE(r.cancelled);
  EXPECT_EQ(r.iterations_used, 3u);
}

TEST(Plan, SpeedClampRespectsCap) {
  PlannerConfig cfg = profile_config("paper_rmsprop");
  cfg.clamp_speed = true;
  cfg.speed_cap = 0.25;
  const auto r = plan(field(), cfg);
  EXPECT_GT(r.max_linear_speed, 0.25);
  EXPECT_LE(speed_report(r.flight_trajectory).max_linear, 0.25 + 1e-12);
  EXPECT_EQ(r.flight_trajectory.poses.back().position, field().goal.position);
}

TEST(Config, RejectsInvalid) {
  PlannerConfig c;
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = PlannerConfig{};
  c.dt = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = PlannerConfig{};
  c.tolerance = -1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(ConfigIo, NamedProfiles) {
  const auto s5 = profile_config("paper_sec5");
  EXPECT_EQ(s5.max_iterations, 30u);
  EXPECT_EQ(s5.dt, 0.05);
  EXPECT_EQ(s5.resolved_samples(), 200u);
  EXPECT_EQ(s5.hyper.alpha, 0.0028);
  EXPECT_EQ(s5.hyper.beta1, 0.0028);
  EXPECT_EQ(s5.hyper.beta2, 0.0028);
  EXPECT_EQ(s5.constants.decay, 0.01);
  const auto ap = profile_config("paper_rmsprop");
  EXPECT_EQ(ap.max_iterations, 100u);
  EXPECT_EQ(ap.dt, 0.2);
  EXPECT_THROW(profile_config("nope"), InvalidArgument);
}

TEST(ConfigIo, NestedAndDottedKeys) {
  const auto c = apply_config_json(PlannerConfig{}, nlohmann::json::parse(R"({
    "optimizer": {"kind": "adam", "eta": 0.05},
    "weights.mu": 0.3,
    "weights": {"Q_diag": [1, 2, 3]},
    "max_iterations": 7,
    "scheme": "five_point"
  })"));
  EXPECT_EQ(c.optimizer, OptimizerKind::kAdam);
  EXPECT_EQ(c.constants.eta, 0.05);
  EXPECT_EQ(*c.weights.mu, 0.3);
  EXPECT_EQ(c.weights.q->diagonal(), Vec3(1, 2, 3));
  EXPECT_EQ(c.max_iterations, 7u);
  EXPECT_EQ(c.scheme.kind, FdKind::kFivePoint);
}

TEST(ConfigIo, UnknownKeyAndOptimizer) {
  EXPECT_THROW(apply_config_json(PlannerConfig{}, nlohmann::json::parse(R"({"bogus": 1})")), InvalidArgument);
  PlannerConfig c;
  try {
    set_config_value(c, "optimizer.kind", "sgd");
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("rmsprop"), std::string::npos);
  }
}

TEST(ConfigIo, RoundTripThroughJson) {
  PlannerConfig c = profile_config("paper_sec5");
  set_config_value(c, "n_agents", "4");
  set_config_value(c, "weights.Q_diag", "0.5,0.6,0.7");
  const auto back = apply_config_json(PlannerConfig{}, config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(ConfigIo, ScenarioRoundTrip) {
  const Scenario s = field();
  const Scenario t = scenario_from_json(scenario_to_json(s));
  ASSERT_EQ(t.obstacles.size(), 4u);
  EXPECT_EQ(t.obstacles[0].center, Vec3(5, 5, -4.5));
  EXPECT_EQ(t.obstacles[0].radius, 5.0);
  EXPECT_EQ(t.weights.lambda, 2.5);
  EXPECT_EQ(t.weights.mu, 0.1);
  EXPECT_EQ(t.goal.position, Vec3(10, 10, 0));
}

TEST(ConfigIo, MissingFileIsIoError) {
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), IoError);
}

TEST(Export, ThreeSampleTrajectory) {
  SampledTrajectory t;
  t.dt = 0.5;
  for (int i = 0; i < 3; ++i) {
    Pose p;
    p.position = Vec3(i, 0, 0);
    t.poses.push_back(p);
    t.timestamps.push_back(0.5 * i);
  }
  const std::string csv = trajectory_csv(t);
  EXPECT_EQ(csv, "t,x,y,z,roll,pitch,yaw\n0,0,0,0,0,0,0\n0.5,1,0,0,0,0,0\n1,2,0,0,0,0,0\n");
}

TEST(Export, NineSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(123456789012.0), "1.23456789e+11");
}

TEST(Export, ReexportIsByteIdentical) {
  const auto r = plan(field(), profile_config("paper_sec5"));
  const auto dir = std::filesystem::temp_directory_path() / "gmp3_export_test";
  std::filesystem::create_directories(dir);
  export_result(r, dir / "a_traj.csv", dir / "a_metrics.csv");
  export_result(r, dir / "b_traj.csv", dir / "b_metrics.csv");
  EXPECT_EQ(slurp(dir / "a_traj.csv"), slurp(dir / "b_traj.csv"));
  EXPECT_EQ(slurp(dir / "a_metrics.csv"), slurp(dir / "b_metrics.csv"));
  const std::string m = slurp(dir / "a_metrics.csv");
  EXPECT_EQ(std::count(m.begin(), m.end(), '\n'), 31);
  EXPECT_EQ(m.rfind("iteration,loss,violation,normalized_loss\n", 0), 0u);
  std::filesystem::remove_all(dir);
}

TEST(Export, UnwritablePathIsIoError) {
  EXPECT_THROW(write_text("/nonexistent-dir/x.csv", "a"), IoError);
}

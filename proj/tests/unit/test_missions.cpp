#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include "sim/virtual_fleet.hpp"
#include "station/ground_station.hpp"
#include "station/missions.hpp"
#include "station/plugins.hpp"

using namespace gmp3;
using nlohmann::json;

namespace {

json two_stage(const std::vector<std::string>& drones) {
  json targets1 = json::object(), targets2 = json::object();
  for (std::size_t i = 0; i < drones.size(); ++i) {
    targets1[drones[i]] = {1.0 * i, 1.0, 1.0};
    targets2[drones[i]] = {1.0 * i, 2.0, 1.5};
  }
  return {{"drones", drones},
          {"altitude", 1.0},
          {"stages", {{{"name", "S1"}, {"targets", targets1}}, {{"name", "S2"}, {"targets", targets2}}}}};
}

Mission& mission(VirtualFleet& f, const std::string& name) {
  return dynamic_cast<Mission&>(*f.station().plugins().find(name));
}

class LoopMission final : public Mission {
 public:
  LoopMission() : Mission("loop", {"d1"}, 1.0) {
    add_stage({"A", nullptr, [](double) { return true; }, [] { return std::string("B"); }, false});
    add_stage({"B", nullptr, [](double) { return true; }, [] { return std::string("A"); }, false});
  }
  std::string type() const override { return "loop"; }
};

}  // namespace

TEST(Plugins, MissingDependencyNamed) {
  VirtualFleet f;
  f.add_drone("d1", Vec3::Zero());
  try {
    f.station().plugins().load("waypoint_mission", "m", two_stage({"d1"}));
    FAIL() << "expected PluginError";
  } catch (const PluginError& e) {
    EXPECT_NE(std::string(e.what()).find("fleet_monitor"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(f.station().plugins().loaded("m"));
}

TEST(Plugins, LoadUnloadRegistersConsoleCommands) {
  VirtualFleet f;
  f.add_drone("d1", Vec3::Zero());
  auto& pm = f.station().plugins();
  EXPECT_EQ(f.station().console("load fleet_monitor fm {\"period\": 0.02}"), "loaded fm\n");
  const auto cmds = pm.console_commands();
  EXPECT_NE(std::find(cmds.begin(), cmds.end(), "fleet"), cmds.end());
  f.run_for(0.2);
  EXPECT_NE(f.station().console("fleet").find("d1"), std::string::npos);
  EXPECT_THROW(pm.load("fleet_monitor", "fm"), PluginError);
  EXPECT_THROW(pm.load("no_such_type"), PluginError);
  pm.unload("fm");
  EXPECT_TRUE(pm.console_commands().empty());
  EXPECT_THROW(f.station().console("fleet"), PluginError);
  EXPECT_THROW(pm.unload("fm"), PluginError);
}

TEST(Plugins, BackgroundTaskStopsOnUnload) {
  VirtualFleet f;
  auto& pm = f.station().plugins();
  auto& fm = dynamic_cast<FleetMonitorPlugin&>(pm.load("fleet_monitor", "fm", {{"period", 0.01}}));
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
  while (fm.heartbeats() < 3 && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  EXPECT_GE(fm.heartbeats(), 3u);
  const auto t0 = std::chrono::steady_clock::now();
  pm.unload("fm");
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
}

TEST(Plugins, DependencyBlocksUnload) {
  VirtualFleet f;
  f.add_drone("d1", Vec3::Zero());
  auto& pm = f.station().plugins();
  pm.load("fleet_monitor");
  pm.load("waypoint_mission", "m", two_stage({"d1"}));
  try {
    pm.unload("fleet_monitor");
    FAIL() << "expected PluginError";
  } catch (const PluginError& e) {
    EXPECT_NE(std::string(e.what()).find("'m'"), std::string::npos) << e.what();
  }
  pm.unload("m");
  pm.unload("fleet_monitor");
  EXPECT_TRUE(pm.names().empty());
}

TEST(Missions, TwoInstancesOfOneTypeRunIndependently) {
  VirtualFleet f;
  f.add_drone("d1", Vec3::Zero());
  f.add_drone("d2", Vec3(2, 0, 0));
  auto& pm = f.station().plugins();
  pm.load("fleet_monitor");
  json o1 = two_stage({"d1"});
  json o2 = two_stage({"d2"});
  o2["stages"][0]["targets"]["d2"] = {2.0, 1.0, 1.0};
  o2["stages"][1]["targets"]["d2"] = {2.0, 2.0, 1.5};
  pm.load("waypoint_mission", "m1", o1);
  pm.load("waypoint_mission", "m2", o2);
  std::string why;
  ASSERT_TRUE(f.station().mission_command("m1", true, f.now(), &why)) << why;
  ASSERT_TRUE(f.station().mission_command("m2", true, f.now(), &why)) << why;
  ASSERT_TRUE(f.run_until([&] {
    return mission(f, "m1").state() == Mission::State::kComplete && mission(f, "m2").state() == Mission::State::kComplete;
  }, 300.0));
  EXPECT_EQ(f.station().missions_json().size(), 2u);
  EXPECT_FALSE(f.station().mission_command("nope", true, f.now(), &why));
  EXPECT_EQ(why, "unknown mission");
}

TEST(Missions, TwoStageRunsToComplete) {
  VirtualFleet f;
  f.add_drone("d1", Vec3::Zero());
  f.add_drone("d2", Vec3(1, 0, 0));
  f.station().plugins().load("fleet_monitor");
  f.station().plugins().load("waypoint_mission", "m", two_stage({"d1", "d2"}));
  auto& m = mission(f, "m");
  EXPECT_EQ(m.stage(), "Ready");
  ASSERT_TRUE(f.station().enqueue("d1", {"start_mission", {{"mission", "m"}}}, f.now()).ok);
  ASSERT_TRUE(f.run_until([&] { return m.state() == Mission::State::kComplete; }, 300.0));
  EXPECT_EQ(m.history(), (std::vector<std::string>{"Ready", "S1", "S2", "ReturnToLaunch", "Complete"}));
  for (const auto& id : {"d1", "d2"}) {
    const auto& v = f.vehicle(id);
    EXPECT_NE(v.state().mode, FlightMode::kAirborne);
    EXPECT_NEAR((v.state().pose.position.head<2>() - v.launch_point().head<2>()).norm(), 0.0, 0.05);
  }
  std::string why;
  EXPECT_FALSE(m.stop(f.now(), &why));
  EXPECT_EQ(why, "mission already complete");
}

TEST(Missions, StopHonoredFromEveryStage) {
  for (const std::string at : {"Ready", "S1", "S2"}) {
    VirtualFleet f;
    f.add_drone("d1", Vec3::Zero());
    f.station().plugins().load("fleet_monitor");
    f.station().plugins().load("waypoint_mission", "m", two_stage({"d1"}));
    auto& m = mission(f, "m");
    if (at != "Ready") {
      ASSERT_TRUE(m.start(f.now()));
      ASSERT_TRUE(f.run_until([&] { return m.stage() == at; }, 100.0)) << at;
      f.run_for(1.0);
    }
    ASSERT_TRUE(m.stop(f.now())) << at;
    EXPECT_EQ(m.stage(), "ReturnToLaunch");
    ASSERT_TRUE(f.run_until([&] { return m.state() == Mission::State::kComplete; }, 100.0)) << at;
    auto expected = std::vector<std::string>{};
    if (at == "Ready") {
      expected = {"ReturnToLaunch", "Complete"};
    } else if (at == "S1") {
      expected = {"Ready", "S1", "ReturnToLaunch", "Complete"};
    } else {
      expected = {"Ready", "S1", "S2", "ReturnToLaunch", "Complete"};
    }
    EXPECT_EQ(m.history(), expected) << at;
    EXPECT_NE(f.vehicle("d1").state().mode, FlightMode::kAirborne) << at;
  }
}

TEST(Missions, LostDronePausesAndResumes) {
  VirtualFleet f;
  f.add_drone("d1", Vec3::Zero());
  f.station().plugins().load("fleet_monitor");
  f.station().plugins().load("waypoint_mission", "m", two_stage({"d1"}));
  auto& m = mission(f, "m");
  auto sub = f.station().events().subscribe();
  ASSERT_TRUE(m.start(f.now()));
  f.run_for(1.0);
  f.mute("d1", true);
  ASSERT_TRUE(f.run_until([&] { return m.state() == Mission::State::kPaused; }, 5.0));
  f.mute("d1", false);
  ASSERT_TRUE(f.run_until([&] { return m.state() == Mission::State::kRunning; }, 5.0));
  bool paused = false, resumed = false;
  for (const auto& e : sub->drain()) {
    if (e.value("type", "") != "mission") continue;
    paused |= e.value("kind", "") == "paused";
    resumed |= e.value("kind", "") == "resumed";
  }
  EXPECT_TRUE(paused);
  EXPECT_TRUE(resumed);
  ASSERT_TRUE(f.run_until([&] { return m.state() == Mission::State::kComplete; }, 300.0));
}

TEST(Missions, NonCyclicReentryIsAnError) {
  VirtualFleet f;
  f.add_drone("d1", Vec3::Zero());
  f.station().plugins().load("fleet_monitor");
  auto& m = dynamic_cast<Mission&>(f.station().plugins().load(std::make_unique<LoopMission>()));
  ASSERT_TRUE(m.start(f.now()));
  f.run_for(0.5);
  EXPECT_EQ(m.status().value("error", ""), "stage 'A' entered twice");
  EXPECT_EQ(m.state(), Mission::State::kComplete);
}

TEST(Missions, ObserverSwapOnLowBattery) {
  VirtualFleet f;
  f.add_drone("a", Vec3(-2, 0, 0));
  f.add_drone("b", Vec3(0, -2, 0));
  f.add_drone("c", Vec3(2, 0, 0));
  f.vehicle("a").set_battery(0.9);
  f.vehicle("b").set_battery(0.8);
  f.vehicle("c").set_battery(0.95);
  f.run_for(0.5);
  f.station().plugins().load("fleet_monitor");
  f.station().plugins().load("observer_swap", "obs",
                             {{"drones", {"a", "b", "c"}}, {"station", {0.0, 0.0, 1.0}}, {"threshold", 0.3}});
  auto& m = dynamic_cast<ObserverSwapMission&>(mission(f, "obs"));
  ASSERT_TRUE(m.start(f.now()));
  EXPECT_EQ(m.observer(), "c");
  ASSERT_TRUE(f.run_until([&] { return m.stage() == "Observe"; }, 100.0));
  f.run_for(2.0);
  EXPECT_EQ(m.swaps(), 0u);
  f.vehicle("c").set_battery(0.2);
  ASSERT_TRUE(f.run_until([&] { return m.swaps() == 1; }, 5.0));
  EXPECT_EQ(m.observer(), "a");
  ASSERT_TRUE(f.run_until([&] { return m.stage() == "Observe" && f.vehicle("c").state().mode != FlightMode::kAirborne; },
                          200.0));
  EXPECT_NEAR((f.vehicle("a").state().pose.position - Vec3(0, 0, 1)).norm(), 0.0, 0.05);
  EXPECT_NEAR((f.vehicle("c").state().pose.position.head<2>() - Vec3(2, 0, 0).head<2>()).norm(), 0.0, 0.05);
  EXPECT_EQ(m.history(), (std::vector<std::string>{"Ready", "Launch", "Observe", "Swap", "Observe"}));
}

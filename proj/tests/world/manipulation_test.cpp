#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles/fk_oracle.hpp"
#include "world/world_fixture.hpp"

namespace teleop::test {
namespace {

using nlohmann::json;

/// Palm position in the world from the model document, for a robot at yaw 0.
Eigen::Vector3d oracle_palm(const Simulator& sim, Side s) {
  static const oracle::Model model(default_model_document());
  std::map<std::string, double> q(sim.state().robot.joints.positions.begin(), sim.state().robot.joints.positions.end());
  const auto t = model.tip(s == Side::Left ? "left_arm" : "right_arm", q);
  const auto& base = sim.state().robot.base.position;
  return {base.x() + t[0][3], base.y() + t[1][3], base.z() + model.doc["base_height"].get<double>() + t[2][3]};
}

Eigen::Vector3d object_position(const Simulator& sim, const std::string& id) {
  return sim.state().find_object(id)->pose.position;
}

ArmTarget reach(Side s, const Eigen::Vector3d& p, ArmMode mode = ArmMode::Mimic) {
  return ArmTarget{s, {p.x(), p.y(), p.z()}, std::nullopt, mode};
}

std::size_t settle(Simulator& sim, std::vector<Event>* sink = nullptr) {
  std::size_t n = 0;
  while (sim.state().robot.joints != sim.state().robot.setpoints && n < 2000) {
    auto ev = sim.tick();
    if (sink) sink->insert(sink->end(), ev.begin(), ev.end());
    ++n;
  }
  return n;
}

TEST(Joints, SliderMovesAtBoundedVelocity) {
  Simulator sim(flat_world());
  const auto& spec = sim.world().model->joint("leftShoulderPitch");
  const double mid = 0.5 * (spec.limits.min + spec.limits.max);
  const auto r = sim.apply(JointSlider{"leftShoulderPitch", mid});
  ASSERT_TRUE(r.accepted);
  EXPECT_EQ(sim.state().robot.setpoints.at("leftShoulderPitch"), mid);
  EXPECT_EQ(sim.state().robot.mode, Mode::Manipulating);
  const double start = sim.state().robot.joints.at("leftShoulderPitch");
  const double per_tick = spec.max_velocity * sim.world().params.dt;
  const auto expected_ticks = static_cast<std::size_t>(std::ceil(std::abs(mid - start) / per_tick - 1e-12));
  double prev = start;
  std::size_t ticks = 0;
  while (sim.state().robot.joints.at("leftShoulderPitch") != mid) {
    sim.tick();
    const double now = sim.state().robot.joints.at("leftShoulderPitch");
    EXPECT_LE(std::abs(now - prev), per_tick + 1e-9);
    prev = now;
    ASSERT_LT(++ticks, 1000u);
  }
  EXPECT_EQ(ticks, expected_ticks);
  sim.tick();
  EXPECT_EQ(sim.state().robot.mode, Mode::Idle);
}

TEST(Joints, SliderAndNudgeClampToLimits) {
  Simulator sim(flat_world());
  const auto& spec = sim.world().model->joint("rightElbowPitch");
  sim.apply(JointSlider{"rightElbowPitch", 100.0});
  EXPECT_EQ(sim.state().robot.setpoints.at("rightElbowPitch"), spec.limits.max);
  sim.apply(JointNudge{"rightElbowPitch", -100.0});
  EXPECT_EQ(sim.state().robot.setpoints.at("rightElbowPitch"), spec.limits.min);
  sim.apply(Fingers{Side::Right, {2.0, -1.0, 0.5, 1.0}});
  EXPECT_EQ(sim.state().robot.setpoints.at("rightThumb"), 1.0);
  EXPECT_EQ(sim.state().robot.setpoints.at("rightIndex"), 0.0);
  EXPECT_EQ(sim.state().robot.setpoints.at("rightMiddle"), 0.5);
}

TEST(Joints, UnknownJointRejected) {
  Simulator sim(flat_world());
  const auto before = sim.snapshot();
  EXPECT_EQ(sim.apply(JointSlider{"tail", 0.1}).reason, RejectReason::UnknownJoint);
  EXPECT_EQ(sim.apply(JointNudge{"tail", 0.1}).reason, RejectReason::UnknownJoint);
  // NeckTorso is all-or-nothing and only takes neck/torso joints.
  EXPECT_EQ(sim.apply(NeckTorso{{{"neckYaw", 0.3}, {"leftElbowPitch", -0.5}}}).reason, RejectReason::UnknownJoint);
  EXPECT_EQ(sim.snapshot(), before);
  EXPECT_EQ(sim.state().robot.setpoints, sim.world().initial.robot.setpoints);
  ASSERT_TRUE(sim.apply(NeckTorso{{{"neckYaw", 0.3}, {"torsoPitch", 0.2}}}).accepted);
  EXPECT_EQ(sim.state().robot.setpoints.at("neckYaw"), 0.3);
  EXPECT_EQ(sim.state().robot.setpoints.at("torsoPitch"), 0.2);
}

TEST(Arms, MimicSolvesImmediatelyAndTracks) {
  Simulator sim(tasks_world());
  const Eigen::Vector3d target(1.05, 1.70, 1.05);
  const auto r = sim.apply(reach(Side::Right, target));
  ASSERT_TRUE(r.accepted) << r.message;
  EXPECT_EQ(sim.state().robot.mode, Mode::Manipulating);
  // Torso stays put; only right-arm joints get new setpoints.
  for (const auto& [name, q] : sim.state().robot.setpoints.positions) {
    if (name.rfind("right", 0) != 0 || name == "rightThumb" || name == "rightIndex" || name == "rightMiddle" ||
        name == "rightPinky") {
      EXPECT_EQ(q, sim.world().initial.robot.setpoints.at(name)) << name;
    }
  }
  settle(sim);
  EXPECT_LE((oracle_palm(sim, Side::Right) - target).norm(), 1e-3);
  EXPECT_LE((sim.palm(Side::Right).position - target).norm(), 1e-3);
  sim.tick();
  EXPECT_EQ(sim.state().robot.mode, Mode::Idle);
}

TEST(Arms, UnreachableTargetFailsClosed) {
  Simulator sim(tasks_world());
  const auto before = sim.snapshot();
  const auto r = sim.apply(reach(Side::Left, {3.0, 2.0, 1.0}));
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, RejectReason::IkFailed);
  EXPECT_EQ(sim.snapshot(), before);
  run_ticks(sim, 20);
  EXPECT_EQ(sim.state().robot.joints, sim.world().initial.robot.joints);
}

TEST(Arms, GrabMarkerNeedsApproval) {
  Simulator sim(tasks_world());
  const Eigen::Vector3d target(1.05, 1.70, 1.05);
  const auto r = sim.apply(reach(Side::Right, target, ArmMode::GrabMarker));
  ASSERT_TRUE(r.accepted) << r.message;
  ASSERT_EQ(count_kind(r.events, EventKind::PlanProposed), 1u);
  EXPECT_EQ(r.events.front().payload.at("kind"), "posture");
  EXPECT_EQ(sim.state().robot.mode, Mode::AwaitingApproval);
  ASSERT_TRUE(sim.state().robot.pending_posture);
  run_ticks(sim, 50);
  EXPECT_EQ(sim.state().robot.joints, sim.world().initial.robot.joints);

  const std::string id = pending_id(sim);
  ASSERT_TRUE(sim.apply(ApprovePlan{id}).accepted);
  EXPECT_EQ(sim.state().robot.mode, Mode::Manipulating);
  settle(sim);
  EXPECT_LE((oracle_palm(sim, Side::Right) - target).norm(), 1e-3);
  EXPECT_EQ(sim.apply(ApprovePlan{id}).reason, RejectReason::UnknownPlan);
}

TEST(Arms, GrabMarkerRejected) {
  Simulator sim(tasks_world());
  sim.apply(reach(Side::Left, {1.1, 2.2, 1.1}, ArmMode::GrabMarker));
  ASSERT_TRUE(sim.apply(RejectPlan{pending_id(sim)}).accepted);
  EXPECT_EQ(sim.state().robot.mode, Mode::Idle);
  run_ticks(sim, 50);
  EXPECT_EQ(sim.state().robot.joints, sim.world().initial.robot.joints);
}

// Grasping ---------------------------------------------------------------------

class Grasp : public ::testing::Test {
 protected:
  Simulator sim{tasks_world()};
  std::string box = tasks_world().tasks.box_id;
  std::vector<Event> events;

  void reach_box(const Eigen::Vector3d& offset = Eigen::Vector3d::Zero()) {
    ASSERT_TRUE(sim.apply(reach(Side::Right, object_position(sim, box) + offset)).accepted);
    settle(sim, &events);
  }
  void close(double c) {
    sim.apply(Fingers{Side::Right, {c, c, c, c}});
    settle(sim, &events);
    sim.tick();
  }
};

TEST_F(Grasp, AttachAtGraspPoint) {
  reach_box();
  EXPECT_EQ(count_kind(events, EventKind::GraspAttached), 0u);
  close(1.0);
  ASSERT_EQ(count_kind(events, EventKind::GraspAttached), 1u);
  EXPECT_EQ(sim.state().find_object(box)->grasped_by, Side::Right);
  EXPECT_EQ(sim.snapshot().holding[1], box);
}

TEST_F(Grasp, ExactCloseThresholdAttaches) {
  reach_box();
  close(0.8);
  EXPECT_EQ(count_kind(events, EventKind::GraspAttached), 1u);
}

TEST_F(Grasp, TooFarDoesNotAttach) {
  reach_box({0.0, 0.0, 0.2});
  close(1.0);
  EXPECT_EQ(count_kind(events, EventKind::GraspAttached), 0u);
  EXPECT_FALSE(sim.state().find_object(box)->grasped_by);
}

TEST_F(Grasp, HysteresisAndReleaseOntoTable) {
  reach_box();
  close(1.0);
  close(0.6);
  EXPECT_EQ(sim.state().find_object(box)->grasped_by, Side::Right);
  EXPECT_EQ(count_kind(events, EventKind::GraspReleased), 0u);
  // Lift a little, then let go: the box drops back onto the table top.
  sim.apply(reach(Side::Right, object_position(sim, box) + Eigen::Vector3d(0, 0, 0.05)));
  settle(sim, &events);
  close(0.3);
  EXPECT_EQ(count_kind(events, EventKind::GraspReleased), 1u);
  const WorldObject& b = *sim.state().find_object(box);
  EXPECT_FALSE(b.grasped_by);
  EXPECT_NEAR(b.pose.position.z(), 0.85 + 0.06, 1e-12);
}

TEST_F(Grasp, BoxFollowsPalmAndLiftCompletesTask) {
  reach_box();
  close(1.0);
  const Eigen::Vector3d offset = object_position(sim, box) - sim.palm(Side::Right).position;
  EXPECT_LE(offset.norm(), 0.05);
  sim.apply(reach(Side::Right, object_position(sim, box) + Eigen::Vector3d(0, 0, 0.12)));
  std::size_t ticks = 0;
  while (sim.state().robot.joints != sim.state().robot.setpoints && ++ticks < 1000) {
    auto ev = sim.tick();
    events.insert(events.end(), ev.begin(), ev.end());
    const Eigen::Vector3d palm = oracle_palm(sim, Side::Right);
    // The grasp offset is fixed in the palm frame; its length is invariant.
    EXPECT_NEAR((object_position(sim, box) - palm).norm(), offset.norm(), 1e-9);
  }
  sim.tick();
  const WorldObject& b = *sim.state().find_object(box);
  EXPECT_GE(b.pose.position.z() - 0.06, 0.85 + 0.10);
  EXPECT_EQ(sim.state().task(Task::PickUpBox), TaskStatus::Complete);
  EXPECT_EQ(count_kind(events, EventKind::TaskCompleted), 1u);
}

TEST(Valve, WristRollMapsOneToOne) {
  Simulator sim(tasks_world());
  const std::string valve = sim.world().tasks.valve_id;
  const double angle0 = sim.state().find_object(valve)->angle;
  ASSERT_TRUE(sim.apply(reach(Side::Left, object_position(sim, valve))).accepted);
  settle(sim);
  sim.apply(Fingers{Side::Left, {1, 1, 1, 1}});
  settle(sim);
  sim.tick();
  ASSERT_EQ(sim.state().find_object(valve)->grasped_by, Side::Left);
  const double roll0 = sim.state().robot.joints.at("leftWristRoll");

  sim.apply(JointNudge{"leftWristRoll", std::numbers::pi / 2});
  std::vector<Event> events;
  settle(sim, &events);
  const WorldObject& v = *sim.state().find_object(valve);
  const double roll = sim.state().robot.joints.at("leftWristRoll") - roll0;
  EXPECT_NEAR(roll, std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(v.rotation, roll, 1e-6);
  EXPECT_NEAR(std::remainder(v.angle - angle0, 2 * std::numbers::pi), std::numbers::pi / 2, 1e-6);
  EXPECT_EQ(count_kind(events, EventKind::ValveTurned), events.size() - count_kind(events, EventKind::ModeChanged) -
                                                             count_kind(events, EventKind::TaskCompleted));
  // Normalized angle, accumulated rotation.
  EXPECT_LE(std::abs(v.angle), std::numbers::pi);
}

TEST(Valve, TurnPastTargetCompletesTask) {
  Simulator sim(tasks_world());
  const std::string valve = sim.world().tasks.valve_id;
  sim.apply(reach(Side::Left, object_position(sim, valve)));
  settle(sim);
  sim.apply(Fingers{Side::Left, {1, 1, 1, 1}});
  settle(sim);
  sim.tick();
  sim.apply(JointNudge{"leftWristRoll", 1.6});
  settle(sim);
  sim.tick();
  EXPECT_EQ(sim.state().task(Task::TurnValve), TaskStatus::Complete);
  // Released: further wrist motion leaves the valve alone.
  sim.apply(Fingers{Side::Left, {0, 0, 0, 0}});
  settle(sim);
  sim.tick();
  const double rot = sim.state().find_object(valve)->rotation;
  sim.apply(JointNudge{"leftWristRoll", -1.0});
  settle(sim);
  EXPECT_EQ(sim.state().find_object(valve)->rotation, rot);
}

TEST(Battery, DrainsAndWarnsOnce) {
  json doc = flat_world_doc();
  doc["sim"] = {{"battery_idle_rate", 20.0}, {"battery_motion_rate", 30.0}};
  Simulator sim(flat_world(doc));
  double prev = sim.state().battery;
  std::vector<Event> events;
  for (int t = 0; t < 400; ++t) {
    if (t == 10) sim.apply(JointSlider{"neckYaw", 0.8});
    auto ev = sim.tick();
    events.insert(events.end(), ev.begin(), ev.end());
    EXPECT_LE(sim.state().battery, prev);
    EXPECT_GE(sim.state().battery, 0.0);
    prev = sim.state().battery;
  }
  EXPECT_EQ(count_kind(events, EventKind::BatteryLow), 1u);
  EXPECT_EQ(sim.state().battery, 0.0);
}

TEST(Battery, IdleTickOnlyBookkeeping) {
  Simulator sim(tasks_world());
  const auto before = sim.snapshot();
  const auto events = sim.tick();
  EXPECT_TRUE(events.empty());
  auto after = sim.snapshot();
  EXPECT_EQ(after.tick, 1u);
  EXPECT_NEAR(after.battery, 100.0 - 0.01 * 0.02, 1e-12);
  after.tick = before.tick;
  after.time = before.time;
  after.battery = before.battery;
  EXPECT_EQ(after, before);
}

}  // namespace
}  // namespace teleop::test

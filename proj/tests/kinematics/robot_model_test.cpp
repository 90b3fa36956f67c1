#include <gtest/gtest.h>

#include "kinematics/model_fixture.hpp"

namespace teleop::kinematics {
namespace {

using test::default_model_document;

RobotModel load(const nlohmann::json& doc) { return load_robot_model(doc.dump()); }

nlohmann::json& joint_named(nlohmann::json& doc, const std::string& name) {
  for (auto& j : doc["joints"]) {
    if (j["name"] == name) return j;
  }
  throw std::runtime_error("no joint " + name);
}

TEST(RobotModel, DefaultModelHasDeclaredChainSizes) {
  const RobotModel& model = test::default_model();
  EXPECT_EQ(model.chain(kTorso).joints.size(), 3u);
  EXPECT_EQ(model.chain(kNeck).joints.size(), 3u);
  for (auto arm : {kLeftArm, kRightArm}) {
    const Chain& c = model.chain(arm);
    EXPECT_EQ(c.joints.size(), 10u);
    EXPECT_EQ(c.shared_torso, 3u);
    EXPECT_EQ(model.arm_joint_names(arm).size(), 7u);
  }
  EXPECT_EQ(model.chain(kLeftFingers).joints.size(), 4u);
  EXPECT_EQ(model.chain(kRightFingers).joints.size(), 4u);
  EXPECT_FALSE(model.chain(kLeftFingers).kinematic);
  // J1 is shoulder pitch.
  EXPECT_EQ(model.arm_joint_names(kLeftArm).front(), "leftShoulderPitch");
  EXPECT_EQ(model.arm_joint_names(kRightArm).back(), "rightWristRoll");
}

TEST(RobotModel, NeckPathRunsThroughTorso) {
  const RobotModel& model = test::default_model();
  const Chain& neck = model.chain(kNeck);
  ASSERT_EQ(neck.path.size(), 6u);
  EXPECT_EQ(model.joints()[neck.path[0]].name, "torsoYaw");
}

TEST(RobotModel, SixJointArmIsRejected) {
  auto doc = default_model_document();
  auto& joints = doc["chains"]["left_arm"]["joints"];
  joints.erase(joints.size() - 1);
  EXPECT_THROW(load(doc), ModelError);
}

TEST(RobotModel, InvertedLimitsAreRejected) {
  auto doc = default_model_document();
  joint_named(doc, "leftElbowPitch")["limits"] = {0.5, -0.5};
  EXPECT_THROW(load(doc), ModelError);
}

TEST(RobotModel, NonUnitAxisIsRejected) {
  auto doc = default_model_document();
  joint_named(doc, "neckYaw")["axis"] = {0.0, 0.0, 2.0};
  EXPECT_THROW(load(doc), ModelError);
}

TEST(RobotModel, NonPositiveVelocityIsRejected) {
  auto doc = default_model_document();
  joint_named(doc, "torsoYaw")["max_velocity"] = 0.0;
  EXPECT_THROW(load(doc), ModelError);
}

TEST(RobotModel, DisconnectedChainIsRejected) {
  auto doc = default_model_document();
  joint_named(doc, "leftElbowPitch")["parent"] = "nowhere_link";
  EXPECT_THROW(load(doc), ModelError);
}

TEST(RobotModel, ArmMustStartWithTorso) {
  auto doc = default_model_document();
  auto& joints = doc["chains"]["right_arm"]["joints"];
  std::swap(joints[0], joints[1]);
  EXPECT_THROW(load(doc), ModelError);
}

TEST(RobotModel, MissingChainIsRejected) {
  auto doc = default_model_document();
  doc["chains"].erase("neck");
  EXPECT_THROW(load(doc), ModelError);
}

TEST(RobotModel, FingerClosureOutsideUnitRangeIsRejected) {
  auto doc = default_model_document();
  joint_named(doc, "leftIndex")["limits"] = {0.0, 1.5};
  EXPECT_THROW(load(doc), ModelError);
}

TEST(RobotModel, MalformedDocumentsAreParseErrors) {
  EXPECT_THROW(load_robot_model("{ not json"), ParseError);
  EXPECT_THROW(load_robot_model("{}"), ParseError);
  auto doc = default_model_document();
  joint_named(doc, "torsoYaw").erase("axis");
  EXPECT_THROW(load(doc), ParseError);
  doc = default_model_document();
  joint_named(doc, "torsoYaw")["type"] = "prismatic";
  EXPECT_THROW(load(doc), ParseError);
}

TEST(RobotModel, LookupErrors) {
  const RobotModel& model = test::default_model();
  EXPECT_THROW(model.chain("tail"), UnknownChain);
  EXPECT_THROW(model.joint("leftKnee"), UnknownJoint);
  EXPECT_THROW(JointState{}.at("torsoYaw"), MissingJoint);
}

TEST(RobotModel, MidRangeAndNeutralRespectLimits) {
  const RobotModel& model = test::default_model();
  const JointState mid = model.mid_range();
  const JointState zero = model.neutral();
  for (const auto& j : model.joints()) {
    EXPECT_DOUBLE_EQ(mid.at(j.name), 0.5 * (j.limits.min + j.limits.max));
    EXPECT_GE(zero.at(j.name), j.limits.min);
    EXPECT_LE(zero.at(j.name), j.limits.max);
  }
}

}  // namespace
}  // namespace teleop::kinematics

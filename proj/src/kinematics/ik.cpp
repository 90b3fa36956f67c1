#include "teleop/kinematics/ik.hpp"

#include <algorithm>
#include <cstdint>
#include <random>

#include <Eigen/Cholesky>

namespace teleop::kinematics {

namespace {

constexpr double kMaxLinearStep = 0.10;   // m per iteration
constexpr double kMaxAngularStep = 0.40;  // rad per iteration
constexpr double kMaxDamping = 10.0;
constexpr int kStallIterations = 15;
constexpr double kStallProgress = 0.9;
constexpr std::uint64_t kReseedSeed = 0x1c0ffee;
// Meters of position error treated as equal to one radian of orientation error.
constexpr double kOrientationWeight = 0.5;

}  // namespace

void validate(const IkParams& p) {
  if (!(p.damping > 0.0) || !(p.position_tolerance > 0.0) || !(p.orientation_tolerance > 0.0)) {
    throw KinematicsError("IK damping and tolerances must be positive");
  }
  if (p.max_iterations < 1) throw KinematicsError("IK max_iterations must be at least 1");
  if (!(p.step_scale > 0.0 && p.step_scale <= 1.0)) throw KinematicsError("IK step_scale must lie in (0, 1]");
}

const char* to_string(IkStatus status) {
  switch (status) {
    case IkStatus::Success: return "Success";
    case IkStatus::NoConvergence: return "NoConvergence";
    case IkStatus::Unreachable: return "Unreachable";
  }
  return "?";
}

IkResult solve_ik(const RobotModel& model, std::string_view chain, const Pose& target,
                  const JointState& seed, const IkParams& params) {
  validate(params);
  const std::vector<std::string> names = movable_joints(model, chain, params.movable);
  for (const auto& j : model.joints()) {
    const double v = seed.at(j.name);
    if (v < j.limits.min || v > j.limits.max) {
      throw KinematicsError("IK seed for '" + j.name + "' lies outside its limits");
    }
  }

  IkResult result;
  result.solution = seed;

  // The first movable joint's position does not depend on the movable joints.
  {
    const Chain& c = model.chain(chain);
    const std::size_t ancestors = c.path.size() - c.joints.size();
    const std::size_t first =
        ancestors + (params.movable == ChainJoints::FreezeTorso ? c.shared_torso : 0);
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    for (std::size_t k = 0; k <= first; ++k) {
      const JointSpec& j = model.joints()[c.path[k]];
      t = t * j.origin;
      if (k < first) t = t * Eigen::Isometry3d(Eigen::AngleAxisd(seed.at(j.name), j.axis));
    }
    if ((target.position - t.translation()).norm() > chain_extension(model, chain, params.movable)) {
      const Pose here = forward_kinematics(model, seed, chain);
      result.status = IkStatus::Unreachable;
      result.position_residual = (target.position - here.position).norm();
      result.orientation_residual = orientation_distance(target.orientation, here.orientation);
      return result;
    }
  }

  const Eigen::Index rows = params.position_only ? 3 : 6;
  const auto n = static_cast<Eigen::Index>(names.size());
  std::vector<const JointSpec*> specs;
  for (const auto& name : names) specs.push_back(&model.joint(name));

  struct Residual {
    Eigen::Matrix<double, 6, 1> err;
    double position = 0.0;
    double orientation = 0.0;
    double score = 0.0;
  };
  auto evaluate = [&](const JointState& q) {
    const Pose here = forward_kinematics(model, q, chain);
    Residual r;
    r.err.head<3>() = target.position - here.position;
    r.err.tail<3>() = orientation_error(target.orientation, here.orientation);
    r.position = r.err.head<3>().norm();
    r.orientation = params.position_only ? 0.0 : orientation_distance(target.orientation, here.orientation);
    r.score = r.err.head<3>().squaredNorm();
    if (rows == 6) r.score += kOrientationWeight * kOrientationWeight * r.err.tail<3>().squaredNorm();
    return r;
  };

  JointState q = seed;
  Residual cur = evaluate(q);
  JointState best = q;
  Residual best_res = cur;
  double lambda = params.damping;
  double stall_reference = cur.score;
  int stalled = 0;
  std::mt19937_64 reseed_rng(kReseedSeed);
  int iter = 0;
  for (;; ++iter) {
    if (cur.position <= params.position_tolerance && cur.orientation <= params.orientation_tolerance) {
      result.status = IkStatus::Success;
      result.solution = q;
      result.iterations = iter;
      result.position_residual = cur.position;
      result.orientation_residual = cur.orientation;
      return result;
    }
    if (iter >= params.max_iterations) break;

    // Task-space error is clamped so far targets are approached in small
    // steps where the linearization holds.
    Eigen::VectorXd e = cur.err.head(rows);
    if (e.head<3>().norm() > kMaxLinearStep) e.head<3>() *= kMaxLinearStep / e.head<3>().norm();
    if (rows == 6 && e.tail<3>().norm() > kMaxAngularStep) e.tail<3>() *= kMaxAngularStep / e.tail<3>().norm();

    Eigen::MatrixXd jac = jacobian(model, q, chain, params.movable).topRows(rows);
    if (rows == 6) {
      jac.bottomRows(3) *= kOrientationWeight;
      e.tail<3>() *= kOrientationWeight;
    }
    // Joints pinned at a limit are dropped when the unconstrained update
    // would push them further out.
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::MatrixXd jjt = jac * jac.transpose();
      jjt.diagonal().array() += lambda * lambda;
      const Eigen::VectorXd dq = jac.transpose() * jjt.ldlt().solve(e);
      bool dropped = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        const JointSpec& j = *specs[static_cast<std::size_t>(i)];
        const double v = q.at(j.name);
        if ((v <= j.limits.min && dq(i) < 0.0) || (v >= j.limits.max && dq(i) > 0.0)) {
          if (jac.col(i).squaredNorm() > 0.0) dropped = true;
          jac.col(i).setZero();
        }
      }
      if (!dropped) break;
    }

    Eigen::MatrixXd jjt = jac * jac.transpose();
    jjt.diagonal().array() += lambda * lambda;
    const Eigen::VectorXd dq = params.step_scale * jac.transpose() * jjt.ldlt().solve(e);
    JointState next = q;
    for (Eigen::Index i = 0; i < n; ++i) {
      const JointSpec& j = *specs[static_cast<std::size_t>(i)];
      next.set(j.name, std::clamp(q.at(j.name) + dq(i), j.limits.min, j.limits.max));
    }
    Residual trial = evaluate(next);
    if (trial.score < cur.score) {
      q = std::move(next);
      cur = trial;
      lambda = std::max(params.damping, lambda * 0.5);
      if (cur.score < best_res.score) {
        best = q;
        best_res = cur;
      }
    } else {
      lambda = std::min(kMaxDamping, lambda * 4.0);
    }

    // A local minimum (usually pinned against limits) restarts the descent
    // from a fresh in-limit posture. The sequence is fixed, so solves stay
    // deterministic.
    if (cur.score < kStallProgress * stall_reference) {
      stall_reference = cur.score;
      stalled = 0;
    } else if (++stalled >= kStallIterations) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const JointSpec& j = *specs[static_cast<std::size_t>(i)];
        q.set(j.name, std::uniform_real_distribution<double>(j.limits.min, j.limits.max)(reseed_rng));
      }
      cur = evaluate(q);
      stall_reference = cur.score;
      stalled = 0;
      lambda = params.damping;
    }
  }
  result.solution = best;
  result.position_residual = best_res.position;
  result.orientation_residual = best_res.orientation;
  result.status = IkStatus::NoConvergence;
  result.iterations = params.max_iterations;
  return result;
}

}  // namespace teleop::kinematics

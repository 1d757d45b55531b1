#include "ingrasp/planner.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ingrasp/kinematics.hpp"
#include "ingrasp/simulator.hpp"

namespace ingrasp {

Trajectory upsample(const Trajectory& coarse, int resolution) {
  const int rows = static_cast<int>(coarse.steps.rows());
  if (rows < 2) throw std::invalid_argument("upsample: trajectory has fewer than 2 rows");
  if (resolution < 2) throw std::invalid_argument("upsample: resolution must be >= 2");

  Trajectory dense;
  dense.steps.resize(resolution, coarse.steps.cols());
  dense.dt = coarse.dt * static_cast<double>(rows - 1) /
             static_cast<double>(resolution - 1);
  dense.steps.row(0) = coarse.steps.row(0);
  dense.steps.row(resolution - 1) = coarse.steps.row(rows - 1);
  for (int s = 1; s < resolution - 1; ++s) {
    const double u = static_cast<double>(s) * static_cast<double>(rows - 1) /
                     static_cast<double>(resolution - 1);
    const int i = std::min(static_cast<int>(std::floor(u)), rows - 2);
    const double frac = u - static_cast<double>(i);
    dense.steps.row(s) =
        (1.0 - frac) * coarse.steps.row(i) + frac * coarse.steps.row(i + 1);
  }
  return dense;
}

std::vector<Pose> predicted_object_path(const HandModel& hand,
                                        const GraspSpec& grasp,
                                        const Trajectory& trajectory) {
  std::vector<Pose> path;
  path.reserve(trajectory.steps.rows());
  for (int t = 0; t < trajectory.steps.rows(); ++t) {
    path.push_back(
        grasp.predicted_object_pose(hand, trajectory.steps.row(t).transpose()));
  }
  return path;
}

PlanResult plan(const HandModel& hand, const GraspSpec& grasp,
                const JointVector& theta0, const Pose& goal,
                const std::optional<CollisionScene>& scene,
                const PlannerConfig& config) {
  if (theta0.size() != hand.dof()) {
    throw std::invalid_argument("plan: theta0 size does not match the hand");
  }
  const Eigen::VectorXd lo = hand.lower_limits();
  const Eigen::VectorXd hi = hand.upper_limits();
  for (int j = 0; j < theta0.size(); ++j) {
    if (theta0[j] < lo[j] || theta0[j] > hi[j]) {
      throw std::invalid_argument("plan: theta0 violates the joint limits");
    }
  }
  if (config.steps < 1) throw std::invalid_argument("plan: steps must be >= 1");

  PlanProblem problem;
  problem.hand = &hand;
  problem.grasp = grasp;
  problem.initial_object_pose = grasp.predicted_object_pose(hand, theta0);
  problem.goal = goal;
  problem.mode = config.mode;
  problem.weights = config.weights;
  problem.scene = scene;
  problem.steps = config.steps;
  problem.dt = config.dt;
  if (config.mode == PlanMode::WaypointInterp) {
    problem.waypoints =
        waypoint_schedule(problem.initial_object_pose, goal, config.steps);
  }

  const int rows = config.steps + 1;
  Eigen::MatrixXd initial(rows, hand.dof());
  for (int t = 0; t < rows; ++t) initial.row(t) = theta0.transpose();

  BoxLimits limits;
  limits.lower.resize(rows, hand.dof());
  limits.upper.resize(rows, hand.dof());
  for (int t = 0; t < rows; ++t) {
    limits.lower.row(t) = lo.transpose();
    limits.upper.row(t) = hi.transpose();
  }
  // Pin the first row to the current configuration.
  limits.lower.row(0) = theta0.transpose();
  limits.upper.row(0) = theta0.transpose();

  const TrajectoryObjective objective = [&](const Eigen::MatrixXd& x,
                                            Eigen::MatrixXd* gradient) {
    const TrajectoryCostValue v = total_cost(x, problem);
    if (gradient != nullptr) *gradient = v.gradient;
    return v.value;
  };

  const SolveResult solved =
      minimize_trajectory(initial, objective, limits, config.dt,
                          config.max_joint_speed, config.solver);

  PlanResult out;
  out.coarse.steps = solved.trajectory;
  out.coarse.dt = config.dt;
  out.report = solved.report;
  out.dense = upsample(out.coarse, config.dense_resolution);
  out.predicted_object_path = predicted_object_path(hand, grasp, out.dense);

  const Pose& reached = out.predicted_object_path.back();
  out.position_error_m = (reached.position - goal.position).norm();
  out.orientation_error_pct =
      orientation_error_pct(goal.orientation, reached.orientation);

  out.min_clearance_m = std::numeric_limits<double>::infinity();
  if (scene && !scene->obstacles.empty() && !scene->object_pieces.empty()) {
    for (const Pose& pose : out.predicted_object_path) {
      for (const SceneDistance& d : scene_distances(*scene, pose)) {
        out.min_clearance_m = std::min(out.min_clearance_m, d.signed_distance);
      }
    }
    out.collision_audit_failed = out.min_clearance_m < 0.0;
  }
  return out;
}

}  // namespace ingrasp

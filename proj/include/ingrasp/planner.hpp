#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "ingrasp/costs.hpp"
#include "ingrasp/geometry.hpp"
#include "ingrasp/grasp.hpp"
#include "ingrasp/hand_model.hpp"
#include "ingrasp/optimizer.hpp"
#include "ingrasp/pose.hpp"

namespace ingrasp {

/// Joint-space trajectory: one configuration per row, uniform spacing.
struct Trajectory {
  Eigen::MatrixXd steps;
  double dt = 0.0;
};

struct PlannerConfig {
  int steps = 10;                 // coarse steps T; the plan has T+1 rows
  double dt = 0.167;              // coarse step duration, seconds
  double max_joint_speed = 0.6;   // radians per second
  int dense_resolution = 100;     // rows after upsampling
  PlanMode mode = PlanMode::WaypointInterp;
  CostWeights weights;
  SolverConfig solver;
};

struct PlanResult {
  Trajectory coarse;
  Trajectory dense;
  /// Object pose implied by the rigid attachment at every dense row.
  std::vector<Pose> predicted_object_path;
  SolveReport report;
  /// Predicted final-pose errors against the goal.
  double position_error_m = 0.0;
  double orientation_error_pct = 0.0;
  /// True when a collision scene was given and some dense-step clearance
  /// went negative. The plan is still returned.
  bool collision_audit_failed = false;
  /// Minimum clearance over dense steps and obstacles; +inf without scene.
  double min_clearance_m = 0.0;
};

/// Piecewise-linear resampling to `resolution` rows spanning the same total
/// duration. The first and last rows are copied exactly.
Trajectory upsample(const Trajectory& coarse, int resolution);

/// Object poses implied by the rigid attachment along a trajectory.
std::vector<Pose> predicted_object_path(const HandModel& hand,
                                        const GraspSpec& grasp,
                                        const Trajectory& trajectory);

/// Plans a joint trajectory that carries the grasped object from its
/// current pose (implied by theta0) to the goal pose. theta0 must respect
/// the joint limits. The trajectory starts at theta0 exactly, stays inside
/// the joint box, and respects the speed limit up to the solver tolerance.
PlanResult plan(const HandModel& hand, const GraspSpec& grasp,
                const JointVector& theta0, const Pose& goal,
                const std::optional<CollisionScene>& scene,
                const PlannerConfig& config);

}  // namespace ingrasp

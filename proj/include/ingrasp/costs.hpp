#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "ingrasp/geometry.hpp"
#include "ingrasp/grasp.hpp"
#include "ingrasp/hand_model.hpp"
#include "ingrasp/pose.hpp"

namespace ingrasp {

using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Scalar cost with its gradient over the flat hand configuration.
struct CostValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Scalar cost with its gradient over a whole trajectory (rows = steps).
struct TrajectoryCostValue {
  double value = 0.0;
  Eigen::MatrixXd gradient;
};

/// Objective weights. Defaults reproduce the reference tuning used by the
/// bundled fixtures.
struct CostWeights {
  double k1 = 0.09;    // waypoint tracking
  double k2 = 100.0;   // relative fingertip position
  double k3 = 1.0;     // relative fingertip direction
  double orientation_weight = 1.0;            // w_or inside pose differences
  Eigen::Vector3d psi = {0.0, 1.0, 0.0};      // direction-angle selector
  double alpha1 = 0.01;   // joint-acceleration smoothing
  double alpha2 = 1000.0; // collision penalty
  double beta = 0.005;    // collision activation margin, meters
};

/// Six-vector pose error [p_a - p_b; w_or * rpy(R_b^T R_a)] with each angle
/// wrapped to (-pi, pi].
Vector6d pose_difference(const Pose& a, const Pose& b, double orientation_weight);

/// Squared pose error between the predicted object pose at q and a target
/// object pose, differentiated through the attachment fingertip chain.
CostValue object_pose_cost(const HandModel& hand, const GraspSpec& grasp,
                           const JointVector& q, const Pose& target_object_pose,
                           double orientation_weight);

/// Squared drift of each grasp fingertip position, expressed in the
/// attachment fingertip frame, from its value at the initial grasp.
CostValue relative_position_cost(const HandModel& hand, const GraspSpec& grasp,
                                 const JointVector& q);

/// Squared drift of the psi-selected direction angles of each grasp
/// fingertip as seen from the attachment fingertip.
CostValue relative_orientation_cost(const HandModel& hand,
                                    const GraspSpec& grasp,
                                    const JointVector& q,
                                    const Eigen::Vector3d& psi);

/// Sum of squared second differences of the joint trajectory, with the
/// index sequence clamped at both ends so the first and last rows are
/// penalized toward zero velocity. Rows of `trajectory` are steps.
TrajectoryCostValue joint_acceleration_cost(const Eigen::MatrixXd& trajectory,
                                            double alpha1);

/// Hinge penalty alpha2 * sum_w (beta - min(beta, sd_w)) over obstacles,
/// where sd_w is the minimum signed distance from the object (placed by the
/// rigid attachment at q) to obstacle w. A quintic taper just inside the
/// activation edge (width min(2.5 mm, beta/2)) brings the value, slope, and
/// curvature to zero together at sd = beta and meets the linear branch with
/// matching slope and zero curvature, so solutions can settle smoothly
/// against the margin; below the taper the penalty is the plain linear
/// hinge, and at sd >= beta the contribution is exactly zero. The gradient
/// flows through the attachment finger only: analytically via the contact
/// witness when separated, by central finite differences when penetrating.
CostValue collision_cost(const HandModel& hand, const GraspSpec& grasp,
                         const JointVector& q, const CollisionScene& scene,
                         double alpha2, double beta);

/// Straight-line object waypoints W_0..W_{steps-1}: positions linearly
/// interpolated and orientations slerped at fractions t/steps, so W_0
/// equals `start` and the goal itself is <em>not</em> included.
std::vector<Pose> waypoint_schedule(const Pose& start, const Pose& goal,
                                    int steps);

enum class PlanMode { WaypointInterp, JointAcc };

/// Everything the trajectory objective needs. `waypoints` must hold T
/// poses (W_0..W_{T-1}) in waypoint mode and may be empty otherwise.
struct PlanProblem {
  const HandModel* hand = nullptr;
  GraspSpec grasp;
  Pose initial_object_pose;
  Pose goal;
  std::vector<Pose> waypoints;
  PlanMode mode = PlanMode::WaypointInterp;
  CostWeights weights;
  std::optional<CollisionScene> scene;
  int steps = 10;    // T: trajectory has T+1 rows
  double dt = 0.167;
};

/// Full objective over a (T+1) x dof trajectory whose row 0 is the fixed
/// initial configuration.
TrajectoryCostValue total_cost(const Eigen::MatrixXd& trajectory,
                               const PlanProblem& problem);

}  // namespace ingrasp

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "ingrasp/feedback.hpp"
#include "ingrasp/grasp.hpp"
#include "ingrasp/hand_model.hpp"
#include "ingrasp/planner.hpp"
#include "ingrasp/pose.hpp"

namespace ingrasp {

/// Disturbances applied per control step. All zero reproduces the plan
/// exactly. Standard deviations of zero disable the corresponding draw's
/// effect without changing the random stream.
struct DisturbanceModel {
  double joint_lag = 0.3;                 // first-order tracking lag in [0, 1)
  double joint_noise_std = 0.002;         // radians, per realized step
  double slip_translation_std = 0.0005;   // meters, attachment drift per step
  double slip_rotation_std = 0.005;       // radians, attachment drift per step
};

struct SimulationConfig {
  DisturbanceModel disturbance;
  std::uint64_t seed = 0;
  bool use_feedback = false;
  FeedbackConfig feedback;
};

struct ExecutionTrace {
  Eigen::MatrixXd commanded;        // one row per dense step
  Eigen::MatrixXd realized;
  std::vector<Pose> object_poses;   // object pose after each step
};

/// Kinematic closed-or-open-loop rollout of a dense plan: joints track the
/// commands through a first-order lag plus noise, and the object follows
/// the attachment fingertip through a slowly drifting attachment transform.
/// `predicted_path` must match `dense` row for row (the planner provides
/// both); it supplies the controller's desired object poses.
ExecutionTrace simulate(const HandModel& hand, const GraspSpec& grasp,
                        const Trajectory& dense,
                        const std::vector<Pose>& predicted_path,
                        const SimulationConfig& config);

/// Final-pose quality numbers.
struct Metrics {
  double position_error_cm = 0.0;
  /// Remaining fraction of the commanded translation, in percent. Absent
  /// when the initial and goal positions coincide.
  std::optional<double> position_error_pct;
  /// Quaternion distance min(|q_d - q|, |q_d + q|) / sqrt(2) in percent.
  double orientation_error_pct = 0.0;
};

double orientation_error_pct(const Eigen::Quaterniond& desired,
                             const Eigen::Quaterniond& actual);

Metrics compute_metrics(const Pose& reached, const Pose& initial,
                        const Pose& goal);

}  // namespace ingrasp

#include "ingrasp/simulator.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "ingrasp/kinematics.hpp"

namespace ingrasp {

namespace {

Pose slip_delta(std::mt19937_64& rng, std::normal_distribution<double>& unit,
                const DisturbanceModel& model) {
  // Fixed draw order and count regardless of the standard deviations.
  Eigen::Vector3d dp, w;
  for (int i = 0; i < 3; ++i) dp[i] = unit(rng) * model.slip_translation_std;
  for (int i = 0; i < 3; ++i) w[i] = unit(rng) * model.slip_rotation_std;
  Pose d;
  d.position = dp;
  const double angle = w.norm();
  if (angle > 1e-16) {
    d.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(angle, w / angle));
  }
  return d;
}

}  // namespace

ExecutionTrace simulate(const HandModel& hand, const GraspSpec& grasp,
                        const Trajectory& dense,
                        const std::vector<Pose>& predicted_path,
                        const SimulationConfig& config) {
  const int rows = static_cast<int>(dense.steps.rows());
  const int dof = static_cast<int>(dense.steps.cols());
  if (rows < 1) throw std::invalid_argument("simulate: empty trajectory");
  if (dof != hand.dof()) {
    throw std::invalid_argument("simulate: trajectory width does not match the hand");
  }
  if (static_cast<int>(predicted_path.size()) != rows) {
    throw std::invalid_argument(
        "simulate: predicted path length does not match the trajectory");
  }
  const DisturbanceModel& dist = config.disturbance;
  if (dist.joint_lag < 0.0 || dist.joint_lag >= 1.0) {
    throw std::invalid_argument("simulate: joint_lag must lie in [0, 1)");
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  ExecutionTrace trace;
  trace.commanded.resize(rows, dof);
  trace.realized.resize(rows, dof);
  trace.object_poses.reserve(rows);

  trace.commanded.row(0) = dense.steps.row(0);
  trace.realized.row(0) = dense.steps.row(0);
  Pose attachment = grasp.thumb_to_object;
  trace.object_poses.push_back(
      fk_pose(hand, grasp.thumb, trace.realized.row(0).transpose()) *
      attachment);

  for (int t = 1; t < rows; ++t) {
    // The controller observes the state after step t-1; the attachment
    // drift for this step is applied afterwards.
    JointVector command = dense.steps.row(t).transpose();
    if (config.use_feedback) {
      command = feedback_command(hand, grasp, command, predicted_path[t],
                                 attachment.inverse(),
                                 trace.realized.row(t - 1).transpose(),
                                 config.feedback);
    }
    attachment = attachment * slip_delta(rng, unit, dist);

    trace.commanded.row(t) = command.transpose();
    Eigen::RowVectorXd realized =
        dist.joint_lag * trace.realized.row(t - 1) +
        (1.0 - dist.joint_lag) * command.transpose();
    for (int j = 0; j < dof; ++j) {
      realized[j] += unit(rng) * dist.joint_noise_std;
    }
    trace.realized.row(t) = realized;
    trace.object_poses.push_back(
        fk_pose(hand, grasp.thumb, trace.realized.row(t).transpose()) *
        attachment);
  }
  return trace;
}

double orientation_error_pct(const Eigen::Quaterniond& desired,
                             const Eigen::Quaterniond& actual) {
  const Eigen::Vector4d qd(desired.w(), desired.x(), desired.y(), desired.z());
  const Eigen::Vector4d qa(actual.w(), actual.x(), actual.y(), actual.z());
  const double d = std::min((qd - qa).norm(), (qd + qa).norm());
  return 100.0 * d / std::sqrt(2.0);
}

Metrics compute_metrics(const Pose& reached, const Pose& initial,
                        const Pose& goal) {
  Metrics m;
  const double err = (reached.position - goal.position).norm();
  m.position_error_cm = 100.0 * err;
  const double commanded = (initial.position - goal.position).norm();
  if (commanded >= 1e-9) {
    m.position_error_pct = 100.0 * err / commanded;
  }
  m.orientation_error_pct =
      orientation_error_pct(goal.orientation, reached.orientation);
  return m;
}

}  // namespace ingrasp

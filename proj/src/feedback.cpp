#include "ingrasp/feedback.hpp"

#include <algorithm>

#include "ingrasp/costs.hpp"

namespace ingrasp {

JointVector feedback_command(const HandModel& hand, const GraspSpec& grasp,
                             const JointVector& planned_next,
                             const Pose& desired_object_next,
                             const Pose& observed_thumb_in_object,
                             const JointVector& measured,
                             const FeedbackConfig& config) {
  // Fingertip pose that would place the object at its desired pose given
  // the attachment as currently observed.
  const Pose target_tip = desired_object_next * observed_thumb_in_object;
  const Pose planned_tip = fk_pose(hand, grasp.thumb, planned_next);
  const Vector6d error =
      pose_difference(planned_tip, target_tip, config.orientation_weight);

  const JointVector& jac_config =
      config.jacobian_at_measured ? measured : planned_next;
  const auto jac = fingertip_jacobian(hand, grasp.thumb, jac_config);
  const Eigen::VectorXd correction_rates = -(jac.transpose() * error);

  JointVector command = planned_next;
  const int off = hand.finger_offset(grasp.thumb);
  for (int j = 0; j < correction_rates.size(); ++j) {
    command[off + j] += config.gain * correction_rates[j];
  }

  const Eigen::VectorXd lo = hand.lower_limits();
  const Eigen::VectorXd hi = hand.upper_limits();
  for (int j = 0; j < command.size(); ++j) {
    command[j] = std::clamp(command[j], lo[j], hi[j]);
  }
  return command;
}

}  // namespace ingrasp

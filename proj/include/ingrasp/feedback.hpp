#pragma once

#include "ingrasp/grasp.hpp"
#include "ingrasp/hand_model.hpp"
#include "ingrasp/kinematics.hpp"
#include "ingrasp/pose.hpp"

namespace ingrasp {

/// Pose-feedback controller tuning.
///
/// `orientation_weight` scales the angular block of the tracking error fed
/// through the Jacobian transpose. The default of zero corrects position
/// only: with the default gain, a full-weight angular term is amplified far
/// beyond stability for finger-sized Jacobians and degrades tracking, so
/// orientation correction is opt-in.
struct FeedbackConfig {
  double gain = 50.0;
  double orientation_weight = 0.0;
  /// Evaluate the Jacobian at the measured configuration (default) or at
  /// the planned one.
  bool jacobian_at_measured = true;
};

/// One control step. Starting from the planned next configuration, adds a
/// Jacobian-transpose correction on the attachment finger's joints that
/// steers its fingertip toward the pose implied by the desired object pose
/// and the *observed* fingertip-in-object transform, then clamps to the
/// joint limits. Joints of all other fingers are returned exactly as
/// planned.
JointVector feedback_command(const HandModel& hand, const GraspSpec& grasp,
                             const JointVector& planned_next,
                             const Pose& desired_object_next,
                             const Pose& observed_thumb_in_object,
                             const JointVector& measured,
                             const FeedbackConfig& config);

}  // namespace ingrasp

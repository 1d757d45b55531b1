#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "ingrasp/hand_model.hpp"
#include "ingrasp/kinematics.hpp"
#include "ingrasp/pose.hpp"

namespace ingrasp {

/// Frozen description of an established grasp: which finger carries the
/// object, the constant object-in-thumb transform, and the relative
/// fingertip quantities the grasp should preserve while the hand moves.
///
/// "Thumb" names the attachment finger; any finger of the model may play
/// the role. Grasp fingers are the non-attachment fingers in contact.
struct GraspSpec {
  int thumb = 0;
  std::vector<int> grasp_fingers;

  /// Object pose in the attachment fingertip frame, X in thumb frame.
  Pose thumb_to_object;
  /// Attachment fingertip in the object frame; inverse of thumb_to_object.
  Pose object_to_thumb;

  /// Initial fingertip position of each grasp finger expressed in the
  /// attachment fingertip frame, one entry per grasp_fingers element.
  std::vector<Eigen::Vector3d> initial_relative_positions;
  /// Initial direction angles (roll is zero by construction; pitch, yaw)
  /// of each grasp fingertip as seen from the attachment fingertip.
  std::vector<Eigen::Vector3d> initial_relative_rpys;

  /// Object pose predicted by the rigid attachment at configuration q.
  Pose predicted_object_pose(const HandModel& hand, const JointVector& q) const;
};

/// Builds the grasp description from the initial configuration and the
/// initial object pose. Throws ParseError when the thumb is listed among
/// the grasp fingers, a finger index repeats, or an index is out of range.
GraspSpec make_grasp_spec(const HandModel& hand, const JointVector& theta0,
                          int thumb, const std::vector<int>& grasp_fingers,
                          const Pose& object_pose);

}  // namespace ingrasp

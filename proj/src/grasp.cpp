#include "ingrasp/grasp.hpp"

#include <set>

namespace ingrasp {

namespace {

Eigen::VectorXd finger_slice(const HandModel& hand, int finger,
                             const Eigen::VectorXd& q) {
  return q.segment(hand.finger_offset(finger), hand.finger_dof(finger));
}

}  // namespace

Pose GraspSpec::predicted_object_pose(const HandModel& hand,
                                      const JointVector& q) const {
  return fk_pose(hand, thumb, q) * thumb_to_object;
}

GraspSpec make_grasp_spec(const HandModel& hand, const JointVector& theta0,
                          int thumb, const std::vector<int>& grasp_fingers,
                          const Pose& object_pose) {
  const int nf = static_cast<int>(hand.fingers.size());
  if (thumb < 0 || thumb >= nf) {
    throw ParseError("grasp: attachment finger index " + std::to_string(thumb) +
                     " is out of range");
  }
  if (theta0.size() != hand.dof()) {
    throw ParseError("grasp: theta0 has " + std::to_string(theta0.size()) +
                     " entries, hand has " + std::to_string(hand.dof()) +
                     " joints");
  }
  std::set<int> seen;
  for (int f : grasp_fingers) {
    if (f < 0 || f >= nf) {
      throw ParseError("grasp: grasp finger index " + std::to_string(f) +
                       " is out of range");
    }
    if (f == thumb) {
      throw ParseError("grasp: attachment finger cannot also be a grasp finger");
    }
    if (!seen.insert(f).second) {
      throw ParseError("grasp: grasp finger " + std::to_string(f) +
                       " listed more than once");
    }
  }

  GraspSpec spec;
  spec.thumb = thumb;
  spec.grasp_fingers = grasp_fingers;

  const Pose thumb_pose = fk_pose(hand, thumb, theta0);
  spec.thumb_to_object = thumb_pose.inverse() * object_pose;
  spec.object_to_thumb = spec.thumb_to_object.inverse();

  // The references must reproduce the relative-pose costs' own arithmetic
  // bit for bit so both costs are exactly zero at theta0: read the rotation
  // straight off the FK isometry rather than through the quaternion in
  // `thumb_pose`, whose round-trip perturbs the last ulp.
  const FingerFrames thumb_frames =
      finger_frames(hand, thumb, finger_slice(hand, thumb, theta0));
  const Eigen::Matrix3d r_thumb_t = thumb_frames.tip.linear().transpose();
  for (int f : grasp_fingers) {
    const FingerFrames f_frames =
        finger_frames(hand, f, finger_slice(hand, f, theta0));
    spec.initial_relative_positions.push_back(
        r_thumb_t *
        (f_frames.tip.translation() - thumb_frames.tip.translation()));
    spec.initial_relative_rpys.push_back(relative_unit_vector_rpy(
        Pose::from_transform(thumb_frames.tip),
        Pose::from_transform(f_frames.tip)));
  }
  return spec;
}

}  // namespace ingrasp

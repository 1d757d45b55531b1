#include "ingrasp/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace ingrasp {

namespace {

Eigen::Isometry3d fixed_offset(const Eigen::Vector3d& xyz,
                               const Eigen::Vector3d& rpy) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = rotation_from_rpy(rpy);
  t.translation() = xyz;
  return t;
}

Eigen::VectorXd finger_slice(const HandModel& hand, int finger,
                             const Eigen::VectorXd& q) {
  return q.segment(hand.finger_offset(finger), hand.finger_dof(finger));
}

}  // namespace

FingerFrames finger_frames(const HandModel& hand, int finger,
                           const Eigen::VectorXd& finger_q) {
  const Finger& f = hand.fingers.at(finger);
  FingerFrames out;
  out.pre_joint.reserve(f.joints.size());
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (size_t j = 0; j < f.joints.size(); ++j) {
    const Joint& joint = f.joints[j];
    t = t * fixed_offset(joint.origin_xyz, joint.origin_rpy);
    out.pre_joint.push_back(t);
    t.linear() = t.linear() *
                 Eigen::AngleAxisd(finger_q[static_cast<int>(j)], joint.axis)
                     .toRotationMatrix();
  }
  out.tip = t * fixed_offset(f.tip_xyz, f.tip_rpy);
  return out;
}

Pose fk_pose(const HandModel& hand, int finger, const JointVector& q) {
  return Pose::from_transform(
      finger_frames(hand, finger, finger_slice(hand, finger, q)).tip);
}

Eigen::Vector3d fk_position(const HandModel& hand, int finger,
                            const JointVector& q) {
  return finger_frames(hand, finger, finger_slice(hand, finger, q))
      .tip.translation();
}

Eigen::Matrix<double, 6, Eigen::Dynamic> fingertip_jacobian(
    const HandModel& hand, int finger, const FingerFrames& frames) {
  const Finger& f = hand.fingers.at(finger);
  const int n = static_cast<int>(f.joints.size());
  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, n);
  const Eigen::Vector3d tip = frames.tip.translation();
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d axis =
        frames.pre_joint[j].linear() * f.joints[j].axis;
    const Eigen::Vector3d origin = frames.pre_joint[j].translation();
    jac.col(j).head<3>() = axis.cross(tip - origin);
    jac.col(j).tail<3>() = axis;
  }
  return jac;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> fingertip_jacobian(
    const HandModel& hand, int finger, const JointVector& q) {
  return fingertip_jacobian(
      hand, finger, finger_frames(hand, finger, finger_slice(hand, finger, q)));
}

Eigen::Vector3d relative_unit_vector_rpy(const Pose& a, const Pose& b) {
  const Eigen::Vector3d d = b.position - a.position;
  const double n = d.norm();
  if (n < 1e-12) {
    throw std::domain_error(
        "relative_unit_vector_rpy: frame origins coincide, direction undefined");
  }
  const Eigen::Vector3d u = a.orientation.conjugate() * (d / n);
  const double pitch = std::asin(std::clamp(-u.z(), -1.0, 1.0));
  const double yaw = std::atan2(u.y(), u.x());
  return {0.0, pitch, yaw};
}

}  // namespace ingrasp

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

#include "ingrasp/hand_model.hpp"
#include "ingrasp/pose.hpp"

namespace ingrasp {

/// Palm-frame frames of one finger at a given configuration.
/// pre_joint[j] places joint j's frame before its own rotation is applied;
/// its translation is the joint origin and its rotated axis is the joint's
/// world axis (rotation about the axis leaves both unchanged).
struct FingerFrames {
  std::vector<Eigen::Isometry3d> pre_joint;
  Eigen::Isometry3d tip = Eigen::Isometry3d::Identity();
};

/// Flat joint vector for the whole hand, finger-major (see HandModel).
using JointVector = Eigen::VectorXd;

FingerFrames finger_frames(const HandModel& hand, int finger,
                           const Eigen::VectorXd& finger_q);

/// Fingertip pose in the palm frame. `q` is the flat hand configuration.
Pose fk_pose(const HandModel& hand, int finger, const JointVector& q);

Eigen::Vector3d fk_position(const HandModel& hand, int finger,
                            const JointVector& q);

/// Geometric Jacobian of the fingertip, 6 x finger_dof. Rows 0-2 are the
/// linear velocity of the tip point, rows 3-5 the angular velocity, both
/// in the palm frame, per unit rate of each of the finger's own joints.
Eigen::Matrix<double, 6, Eigen::Dynamic> fingertip_jacobian(
    const HandModel& hand, int finger, const JointVector& q);

/// Same, computed from frames already on hand.
Eigen::Matrix<double, 6, Eigen::Dynamic> fingertip_jacobian(
    const HandModel& hand, int finger, const FingerFrames& frames);

/// Roll/pitch/yaw of the rotation that takes the x-axis of frame `a` onto
/// the unit vector from `a`'s origin to `b`'s origin, expressed in frame
/// `a`. Roll is identically zero by construction: the returned angles are
/// the elevation/heading decomposition (0, asin(-u_z), atan2(u_y, u_x)) of
/// the direction u in `a` coordinates. Throws std::domain_error when the
/// origins coincide (direction undefined).
Eigen::Vector3d relative_unit_vector_rpy(const Pose& a, const Pose& b);

}  // namespace ingrasp

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ingrasp {

/// Rigid transform stored as position + unit quaternion.
///
/// The quaternion is kept normalized: every factory and composition
/// renormalizes, so `orientation.norm()` stays within 1e-9 of one.
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  static Pose identity() { return Pose{}; }

  static Pose from_parts(const Eigen::Vector3d& p, const Eigen::Quaterniond& q);

  /// Build from translation + extrinsic X-Y-Z roll/pitch/yaw angles.
  static Pose from_xyz_rpy(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy);

  static Pose from_transform(const Eigen::Isometry3d& t);

  Eigen::Isometry3d transform() const;
  Eigen::Matrix3d rotation() const { return orientation.toRotationMatrix(); }

  Pose inverse() const;

  /// Composition: this * other, with the quaternion renormalized.
  Pose operator*(const Pose& other) const;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Rotation from extrinsic X-Y-Z angles: R = Rz(yaw) * Ry(pitch) * Rx(roll).
Eigen::Matrix3d rotation_from_rpy(const Eigen::Vector3d& rpy);

/// Inverse of rotation_from_rpy. Each returned angle lies in (-pi, pi]
/// (pitch in [-pi/2, pi/2]). At gimbal lock (|pitch| = pi/2) yaw is set
/// to zero and roll absorbs the free rotation.
Eigen::Vector3d rpy_from_rotation(const Eigen::Matrix3d& r);

/// Maps a space-frame angular velocity to extrinsic X-Y-Z angle rates at
/// the given angles. Singular at |pitch| = pi/2; cos(pitch) is clamped to
/// keep the result finite near the singularity.
Eigen::Vector3d rpy_rates_from_angular(const Eigen::Vector3d& rpy,
                                       const Eigen::Vector3d& omega);

/// Angle of the relative rotation between two unit quaternions, in [0, pi].
double quaternion_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

}  // namespace ingrasp

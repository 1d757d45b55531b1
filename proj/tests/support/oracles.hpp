#pragma once

// Independent reference implementations used to check the library. These
// deliberately avoid the library's own math paths: plain 4x4 matrix
// products, explicit trigonometric formulas, and finite differences.

#include <array>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "ingrasp/hand_model.hpp"

namespace oracle {

using Mat4 = Eigen::Matrix4d;

// Rotation matrices written out entry by entry.
inline Mat4 rot_x(double a) {
  Mat4 m = Mat4::Identity();
  m(1, 1) = std::cos(a);
  m(1, 2) = -std::sin(a);
  m(2, 1) = std::sin(a);
  m(2, 2) = std::cos(a);
  return m;
}

inline Mat4 rot_y(double a) {
  Mat4 m = Mat4::Identity();
  m(0, 0) = std::cos(a);
  m(0, 2) = std::sin(a);
  m(2, 0) = -std::sin(a);
  m(2, 2) = std::cos(a);
  return m;
}

inline Mat4 rot_z(double a) {
  Mat4 m = Mat4::Identity();
  m(0, 0) = std::cos(a);
  m(0, 1) = -std::sin(a);
  m(1, 0) = std::sin(a);
  m(1, 1) = std::cos(a);
  return m;
}

inline Mat4 translation(const Eigen::Vector3d& t) {
  Mat4 m = Mat4::Identity();
  m(0, 3) = t.x();
  m(1, 3) = t.y();
  m(2, 3) = t.z();
  return m;
}

// Rodrigues' formula for rotation about a unit axis.
inline Mat4 rot_axis(const Eigen::Vector3d& axis, double a) {
  const double c = std::cos(a), s = std::sin(a);
  const double x = axis.x(), y = axis.y(), z = axis.z();
  Mat4 m = Mat4::Identity();
  m(0, 0) = c + x * x * (1 - c);
  m(0, 1) = x * y * (1 - c) - z * s;
  m(0, 2) = x * z * (1 - c) + y * s;
  m(1, 0) = y * x * (1 - c) + z * s;
  m(1, 1) = c + y * y * (1 - c);
  m(1, 2) = y * z * (1 - c) - x * s;
  m(2, 0) = z * x * (1 - c) - y * s;
  m(2, 1) = z * y * (1 - c) + x * s;
  m(2, 2) = c + z * z * (1 - c);
  return m;
}

// Fixed-frame offset as used by the joint origins: translate, then apply
// extrinsic X-Y-Z rotation.
inline Mat4 offset(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy) {
  return translation(xyz) * rot_z(rpy.z()) * rot_y(rpy.y()) * rot_x(rpy.x());
}

// Fingertip frame by plain homogeneous-matrix chaining.
inline Mat4 fingertip_frame(const ingrasp::HandModel& hand, int finger,
                            const Eigen::VectorXd& q) {
  const ingrasp::Finger& f = hand.fingers.at(finger);
  const int off = hand.finger_offset(finger);
  Mat4 t = Mat4::Identity();
  for (size_t j = 0; j < f.joints.size(); ++j) {
    const ingrasp::Joint& joint = f.joints[j];
    t = t * offset(joint.origin_xyz, joint.origin_rpy) *
        rot_axis(joint.axis, q[off + static_cast<int>(j)]);
  }
  return t * offset(f.tip_xyz, f.tip_rpy);
}

// Minimal rotation taking the x-axis onto the unit vector u (axis-angle
// about x_hat cross u). Undefined when u is anti-parallel to x_hat.
inline Eigen::Matrix3d minimal_rotation_from_x(const Eigen::Vector3d& u) {
  const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d axis = x.cross(u);
  const double s = axis.norm();
  const double c = x.dot(u);
  if (s < 1e-12) {
    return c > 0 ? Eigen::Matrix3d::Identity()
                 : Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitZ())
                       .toRotationMatrix();
  }
  return rot_axis(axis / s, std::atan2(s, c)).topLeftCorner<3, 3>();
}

// Analytic signed distance, witnesses, and normal for two spheres.
struct SpherePair {
  double signed_distance;
  Eigen::Vector3d normal;
  Eigen::Vector3d witness_a, witness_b;
};

inline SpherePair sphere_pair(const Eigen::Vector3d& ca, double ra,
                              const Eigen::Vector3d& cb, double rb) {
  SpherePair out;
  const Eigen::Vector3d d = ca - cb;
  const double dist = d.norm();
  out.signed_distance = dist - ra - rb;
  out.normal = dist > 1e-12 ? Eigen::Vector3d(d / dist)
                            : Eigen::Vector3d::UnitX();
  out.witness_a = ca - ra * out.normal;
  out.witness_b = cb + rb * out.normal;
  return out;
}

}  // namespace oracle

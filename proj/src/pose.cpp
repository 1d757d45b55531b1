#include "ingrasp/pose.hpp"

#include <algorithm>
#include <cmath>

namespace ingrasp {

Pose Pose::from_parts(const Eigen::Vector3d& p, const Eigen::Quaterniond& q) {
  Pose out;
  out.position = p;
  out.orientation = q.normalized();
  return out;
}

Pose Pose::from_xyz_rpy(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy) {
  return from_parts(xyz, Eigen::Quaterniond(rotation_from_rpy(rpy)));
}

Pose Pose::from_transform(const Eigen::Isometry3d& t) {
  return from_parts(t.translation(), Eigen::Quaterniond(t.linear()));
}

Eigen::Isometry3d Pose::transform() const {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = orientation.toRotationMatrix();
  t.translation() = position;
  return t;
}

Pose Pose::inverse() const {
  Pose out;
  out.orientation = orientation.conjugate();
  out.position = out.orientation * (-position);
  return out;
}

Pose Pose::operator*(const Pose& other) const {
  Pose out;
  out.position = position + orientation * other.position;
  out.orientation = (orientation * other.orientation).normalized();
  return out;
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * M_PI);  // lands in [-pi, pi]
  if (w <= -M_PI) w += 2.0 * M_PI;
  return w;
}

Eigen::Matrix3d rotation_from_rpy(const Eigen::Vector3d& rpy) {
  const Eigen::AngleAxisd rx(rpy.x(), Eigen::Vector3d::UnitX());
  const Eigen::AngleAxisd ry(rpy.y(), Eigen::Vector3d::UnitY());
  const Eigen::AngleAxisd rz(rpy.z(), Eigen::Vector3d::UnitZ());
  return (rz * ry * rx).toRotationMatrix();
}

Eigen::Vector3d rpy_from_rotation(const Eigen::Matrix3d& r) {
  // atan2 against |cos(pitch)| stays fully accurate as the pitch nears
  // +-pi/2, where the equivalent asin of -r(2,0) would lose half the
  // significant digits to its infinite slope.
  const double cos_pitch = std::hypot(r(0, 0), r(1, 0));
  const double pitch = std::atan2(-r(2, 0), cos_pitch);
  double roll, yaw;
  if (cos_pitch > 1e-9) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    // Gimbal lock: only roll-yaw sums are observable; put it all in roll.
    roll = std::atan2(-r(1, 2), r(1, 1));
    yaw = 0.0;
  }
  return {wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)};
}

Eigen::Vector3d rpy_rates_from_angular(const Eigen::Vector3d& rpy,
                                       const Eigen::Vector3d& omega) {
  const double sy = std::sin(rpy.z()), cy = std::cos(rpy.z());
  const double sp = std::sin(rpy.y());
  double cp = std::cos(rpy.y());
  if (std::abs(cp) < 1e-9) cp = (cp < 0.0 ? -1e-9 : 1e-9);
  // Inverse of the rate matrix B with omega = B * rpy_dot,
  // B = [[cy*cp, -sy, 0], [sy*cp, cy, 0], [-sp, 0, 1]].
  Eigen::Matrix3d binv;
  binv << cy / cp, sy / cp, 0.0,
      -sy, cy, 0.0,
      cy * sp / cp, sy * sp / cp, 1.0;
  return binv * omega;
}

double quaternion_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const double d = std::clamp(std::abs(a.dot(b)), 0.0, 1.0);
  return 2.0 * std::acos(d);
}

}  // namespace ingrasp

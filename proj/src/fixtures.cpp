#include "ingrasp/fixtures.hpp"

#include <cmath>

namespace ingrasp::fixtures {

namespace {

Finger make_finger(const std::string& name, const Eigen::Vector3d& mount_xyz,
                   const Eigen::Vector3d& mount_rpy) {
  Finger f;
  f.name = name;
  Joint spread;
  spread.origin_xyz = mount_xyz;
  spread.origin_rpy = mount_rpy;
  spread.axis = Eigen::Vector3d::UnitX();
  spread.limit_lower = -0.6;
  spread.limit_upper = 0.6;
  f.joints.push_back(spread);

  const double risers[3] = {0.016, 0.054, 0.038};
  const double uppers[3] = {1.6, 1.7, 1.8};
  for (int k = 0; k < 3; ++k) {
    Joint curl;
    curl.origin_xyz = Eigen::Vector3d(0.0, 0.0, risers[k]);
    curl.axis = Eigen::Vector3d::UnitY();
    curl.limit_lower = -0.3;
    curl.limit_upper = uppers[k];
    f.joints.push_back(curl);
  }
  f.tip_xyz = Eigen::Vector3d(0.0, 0.0, 0.044);
  return f;
}

}  // namespace

HandModel demo_hand() {
  HandModel hand;
  hand.name = "demo16";
  hand.fingers.push_back(
      make_finger("index", {0.0, 0.045, 0.0}, Eigen::Vector3d::Zero()));
  hand.fingers.push_back(
      make_finger("middle", {0.0, 0.0, 0.0}, Eigen::Vector3d::Zero()));
  hand.fingers.push_back(
      make_finger("ring", {0.0, -0.045, 0.0}, Eigen::Vector3d::Zero()));
  hand.fingers.push_back(
      make_finger("thumb", {0.115, 0.0, 0.0}, {0.0, 0.0, M_PI}));
  hand.validate();
  return hand;
}

Eigen::VectorXd demo_theta0() {
  Eigen::VectorXd q(16);
  q << 0.1, 0.3, 0.3, 0.3,    // index
      0.0, 0.3, 0.3, 0.3,     // middle
      -0.1, 0.3, 0.3, 0.3,    // ring
      0.0, 0.25, 0.35, 0.35;  // thumb
  return q;
}

Pose demo_object_pose() {
  return Pose::from_parts({0.058, 0.0, 0.126}, Eigen::Quaterniond::Identity());
}

GraspSpec demo_grasp_spec(const HandModel& hand) {
  return make_grasp_spec(hand, demo_theta0(), hand.finger_index("thumb"),
                         {hand.finger_index("index"), hand.finger_index("middle")},
                         demo_object_pose());
}

}  // namespace ingrasp::fixtures

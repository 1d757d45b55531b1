#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace ingrasp {

/// Raised when a model, grasp, scene, or plan document fails validation.
/// The message names the offending entity and field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One revolute joint: a fixed frame offset followed by rotation about a
/// unit axis expressed in that frame.
struct Joint {
  Eigen::Vector3d origin_xyz = Eigen::Vector3d::Zero();
  Eigen::Vector3d origin_rpy = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double limit_lower = 0.0;
  double limit_upper = 0.0;
};

/// Serial revolute chain from the palm to a fingertip frame.
struct Finger {
  std::string name;
  std::vector<Joint> joints;
  Eigen::Vector3d tip_xyz = Eigen::Vector3d::Zero();
  Eigen::Vector3d tip_rpy = Eigen::Vector3d::Zero();
};

/// A hand is a set of independent finger chains sharing the palm frame.
/// Joint vectors over the whole hand are flat, finger-major, in the order
/// the fingers are declared.
struct HandModel {
  std::string name;
  std::vector<Finger> fingers;

  int dof() const;
  int finger_dof(int finger) const;
  /// First flat index of the given finger's joints.
  int finger_offset(int finger) const;
  /// Index of the named finger; throws ParseError if absent.
  int finger_index(const std::string& finger_name) const;

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;

  /// Structural checks: at least one finger, unique non-empty finger names,
  /// at least one joint per finger, unit-normalizable axes, lower < upper.
  /// Throws ParseError naming the offending finger/joint. Normalizes axes.
  void validate();
};

}  // namespace ingrasp

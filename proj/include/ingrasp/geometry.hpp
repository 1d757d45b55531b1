#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>
#include <string>
#include <vector>

#include "ingrasp/pose.hpp"

namespace ingrasp {

/// Raised when an iterative distance query fails to terminate within its
/// iteration budget. The message names the shape pair.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Convex collision shape with a placement. Spheres are represented as a
/// point core plus a margin equal to the radius, which keeps sphere-sphere
/// distances exact for both separation and penetration.
struct ConvexShape {
  enum class Kind { Sphere, Box, Hull };

  Kind kind = Kind::Sphere;
  std::string label;                     // used in error messages
  double radius = 0.0;                   // Sphere
  Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();  // Box
  std::vector<Eigen::Vector3d> vertices;                   // Hull, local frame
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();

  static ConvexShape sphere(double radius, const Eigen::Isometry3d& pose,
                            std::string label = "sphere");
  static ConvexShape box(const Eigen::Vector3d& half_extents,
                         const Eigen::Isometry3d& pose,
                         std::string label = "box");
  static ConvexShape hull(std::vector<Eigen::Vector3d> vertices,
                          const Eigen::Isometry3d& pose,
                          std::string label = "hull");

  /// Margin inflating the core (radius for spheres, zero otherwise).
  double margin() const;

  /// Farthest core point in the given world direction, world frame.
  /// The direction need not be normalized.
  Eigen::Vector3d support(const Eigen::Vector3d& direction) const;
};

struct DistanceResult {
  /// Positive clearance between the inflated shapes, negative penetration.
  double signed_distance = 0.0;
  /// Closest points on the inflated surfaces (contact points when touching;
  /// for penetrating shapes they lie on the respective surfaces along the
  /// penetration axis).
  Eigen::Vector3d witness_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d witness_b = Eigen::Vector3d::Zero();
  /// Gradient of signed_distance with respect to a translation of shape a.
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
};

/// Signed distance between two convex shapes via GJK (separation) and EPA
/// (penetration depth). Throws GeometryError if the iterative solve does
/// not terminate.
DistanceResult signed_distance(const ConvexShape& a, const ConvexShape& b);

/// Obstacles fixed in the world plus object-attached collision pieces
/// whose poses are given in the object frame.
struct CollisionScene {
  std::vector<ConvexShape> object_pieces;  // pose = piece in object frame
  std::vector<ConvexShape> obstacles;      // pose = obstacle in world frame
};

/// For each obstacle, the minimum signed distance over all object pieces
/// placed at the given object pose. Empty pieces or obstacles yield an
/// empty / trivially safe result.
struct SceneDistance {
  double signed_distance = 0.0;
  int piece = -1;     // argmin object piece
  DistanceResult detail;
};
std::vector<SceneDistance> scene_distances(const CollisionScene& scene,
                                           const Pose& object_pose);

}  // namespace ingrasp

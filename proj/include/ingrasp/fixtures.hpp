#pragma once

#include "ingrasp/grasp.hpp"
#include "ingrasp/hand_model.hpp"
#include "ingrasp/pose.hpp"

namespace ingrasp::fixtures {

/// Bundled 16-DOF, 4-finger demonstration hand ("demo16"): three parallel
/// fingers (index, middle, ring) and an opposing thumb. Dimensions are
/// roughly those of a small robotic hand; each finger is a spread joint
/// followed by three curl joints.
HandModel demo_hand();

/// Pinch configuration used by the bundled grasp: thumb and middle tips
/// oppose about 2.7 cm apart with the index closing from the side.
Eigen::VectorXd demo_theta0();

/// Pose of the demonstration object (its center sits between the tips).
Pose demo_object_pose();

/// Grasp of the demo object: attachment on the thumb, index and middle as
/// grasp fingers, ring free.
GraspSpec demo_grasp_spec(const HandModel& hand);

}  // namespace ingrasp::fixtures

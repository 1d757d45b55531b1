#include "ingrasp/costs.hpp"

#include <algorithm>
#include <cmath>

#include "ingrasp/kinematics.hpp"

namespace ingrasp {

namespace {

Eigen::VectorXd finger_slice(const HandModel& hand, int finger,
                             const Eigen::VectorXd& q) {
  return q.segment(hand.finger_offset(finger), hand.finger_dof(finger));
}

}  // namespace

Vector6d pose_difference(const Pose& a, const Pose& b,
                         double orientation_weight) {
  Vector6d d;
  d.head<3>() = a.position - b.position;
  // The relative rotation comes from the quaternion product rather than a
  // matrix transpose-product: for bitwise-equal orientations the vector
  // part cancels exactly, so identical poses difference to exactly zero.
  const Eigen::Quaterniond rel = b.orientation.conjugate() * a.orientation;
  d.tail<3>() = orientation_weight * rpy_from_rotation(rel.toRotationMatrix());
  return d;
}

CostValue object_pose_cost(const HandModel& hand, const GraspSpec& grasp,
                           const JointVector& q, const Pose& target_object_pose,
                           double orientation_weight) {
  CostValue out;
  out.gradient = Eigen::VectorXd::Zero(hand.dof());

  const FingerFrames frames =
      finger_frames(hand, grasp.thumb, finger_slice(hand, grasp.thumb, q));
  const Pose tip = Pose::from_transform(frames.tip);
  // The object rides the attachment fingertip rigidly; the error is
  // measured at the object pose itself.
  const Pose predicted = tip * grasp.thumb_to_object;

  const Vector6d diff =
      pose_difference(predicted, target_object_pose, orientation_weight);
  out.value = diff.squaredNorm();

  const Eigen::Matrix3d rg_t = target_object_pose.rotation().transpose();
  const Eigen::Vector3d rpy_err =
      rpy_from_rotation(rg_t * predicted.rotation());
  // Rigid lever arm from the fingertip to the object origin: a fingertip
  // twist (v, omega) moves the object origin at v + omega x arm.
  const Eigen::Vector3d arm = predicted.position - tip.position;
  const auto jac = fingertip_jacobian(hand, grasp.thumb, frames);
  const int off = hand.finger_offset(grasp.thumb);
  for (int j = 0; j < jac.cols(); ++j) {
    const Eigen::Vector3d v = jac.col(j).head<3>();
    const Eigen::Vector3d omega = jac.col(j).tail<3>();
    const Eigen::Vector3d drpy = rpy_rates_from_angular(rpy_err, rg_t * omega);
    out.gradient[off + j] =
        2.0 * (diff.head<3>().dot(v + omega.cross(arm)) +
               diff.tail<3>().dot(orientation_weight * drpy));
  }
  return out;
}

CostValue relative_position_cost(const HandModel& hand, const GraspSpec& grasp,
                                 const JointVector& q) {
  CostValue out;
  out.gradient = Eigen::VectorXd::Zero(hand.dof());

  const FingerFrames thumb_frames =
      finger_frames(hand, grasp.thumb, finger_slice(hand, grasp.thumb, q));
  const Eigen::Vector3d p_thumb = thumb_frames.tip.translation();
  const Eigen::Matrix3d r_thumb_t = thumb_frames.tip.linear().transpose();
  const auto thumb_jac = fingertip_jacobian(hand, grasp.thumb, thumb_frames);
  const int thumb_off = hand.finger_offset(grasp.thumb);

  for (size_t k = 0; k < grasp.grasp_fingers.size(); ++k) {
    const int f = grasp.grasp_fingers[k];
    const FingerFrames f_frames =
        finger_frames(hand, f, finger_slice(hand, f, q));
    const Eigen::Vector3d p_f = f_frames.tip.translation();
    const Eigen::Vector3d rel = r_thumb_t * (p_f - p_thumb);
    const Eigen::Vector3d r = grasp.initial_relative_positions[k] - rel;
    out.value += r.squaredNorm();

    const auto f_jac = fingertip_jacobian(hand, f, f_frames);
    const int f_off = hand.finger_offset(f);
    for (int j = 0; j < f_jac.cols(); ++j) {
      const Eigen::Vector3d dr = -(r_thumb_t * f_jac.col(j).head<3>());
      out.gradient[f_off + j] += 2.0 * r.dot(dr);
    }
    for (int j = 0; j < thumb_jac.cols(); ++j) {
      const Eigen::Vector3d v = thumb_jac.col(j).head<3>();
      const Eigen::Vector3d omega = thumb_jac.col(j).tail<3>();
      const Eigen::Vector3d dr =
          r_thumb_t * (omega.cross(p_f - p_thumb)) + r_thumb_t * v;
      out.gradient[thumb_off + j] += 2.0 * r.dot(dr);
    }
  }
  return out;
}

CostValue relative_orientation_cost(const HandModel& hand,
                                    const GraspSpec& grasp,
                                    const JointVector& q,
                                    const Eigen::Vector3d& psi) {
  CostValue out;
  out.gradient = Eigen::VectorXd::Zero(hand.dof());

  const FingerFrames thumb_frames =
      finger_frames(hand, grasp.thumb, finger_slice(hand, grasp.thumb, q));
  const Pose thumb_tip = Pose::from_transform(thumb_frames.tip);
  const Eigen::Matrix3d r_thumb_t = thumb_frames.tip.linear().transpose();
  const auto thumb_jac = fingertip_jacobian(hand, grasp.thumb, thumb_frames);
  const int thumb_off = hand.finger_offset(grasp.thumb);

  for (size_t k = 0; k < grasp.grasp_fingers.size(); ++k) {
    const int f = grasp.grasp_fingers[k];
    const FingerFrames f_frames =
        finger_frames(hand, f, finger_slice(hand, f, q));
    const Pose f_tip = Pose::from_transform(f_frames.tip);

    const Eigen::Vector3d rpy = relative_unit_vector_rpy(thumb_tip, f_tip);
    Eigen::Vector3d err;
    for (int c = 0; c < 3; ++c) {
      err[c] = psi[c] * wrap_angle(rpy[c] - grasp.initial_relative_rpys[k][c]);
    }
    out.value += err.squaredNorm();

    // Chain rule through the direction vector u in the thumb tip frame.
    const Eigen::Vector3d d = f_tip.position - thumb_tip.position;
    const double dn = d.norm();
    const Eigen::Vector3d u_palm = d / dn;
    const Eigen::Vector3d u = r_thumb_t * u_palm;
    const Eigen::Matrix3d proj =
        (Eigen::Matrix3d::Identity() - u_palm * u_palm.transpose()) / dn;

    const double uz2 = std::min(u.z() * u.z(), 1.0 - 1e-12);
    const double dpitch_duz = -1.0 / std::sqrt(1.0 - uz2);
    const double uxy2 = std::max(u.x() * u.x() + u.y() * u.y(), 1e-12);

    const auto accumulate = [&](int flat, const Eigen::Vector3d& du) {
      const double dpitch = dpitch_duz * du.z();
      const double dyaw = (u.x() * du.y() - u.y() * du.x()) / uxy2;
      out.gradient[flat] +=
          2.0 * (err[1] * psi[1] * dpitch + err[2] * psi[2] * dyaw);
    };

    const auto f_jac = fingertip_jacobian(hand, f, f_frames);
    const int f_off = hand.finger_offset(f);
    for (int j = 0; j < f_jac.cols(); ++j) {
      const Eigen::Vector3d du = r_thumb_t * (proj * f_jac.col(j).head<3>());
      accumulate(f_off + j, du);
    }
    for (int j = 0; j < thumb_jac.cols(); ++j) {
      const Eigen::Vector3d v = thumb_jac.col(j).head<3>();
      const Eigen::Vector3d omega = thumb_jac.col(j).tail<3>();
      const Eigen::Vector3d du = r_thumb_t * (proj * (-v)) -
                                 r_thumb_t * (omega.cross(u_palm));
      accumulate(thumb_off + j, du);
    }
  }
  return out;
}

TrajectoryCostValue joint_acceleration_cost(const Eigen::MatrixXd& trajectory,
                                            double alpha1) {
  const int last = static_cast<int>(trajectory.rows()) - 1;
  TrajectoryCostValue out;
  out.gradient = Eigen::MatrixXd::Zero(trajectory.rows(), trajectory.cols());
  const auto clamp_row = [&](int s) { return std::clamp(s, 0, last); };
  for (int t = 0; t <= last + 1; ++t) {
    const int i0 = clamp_row(t - 2);
    const int i1 = clamp_row(t - 1);
    const int i2 = clamp_row(t);
    const Eigen::RowVectorXd d =
        trajectory.row(i0) - 2.0 * trajectory.row(i1) + trajectory.row(i2);
    out.value += alpha1 * d.squaredNorm();
    out.gradient.row(i0) += 2.0 * alpha1 * d;
    out.gradient.row(i1) -= 4.0 * alpha1 * d;
    out.gradient.row(i2) += 2.0 * alpha1 * d;
  }
  return out;
}

CostValue collision_cost(const HandModel& hand, const GraspSpec& grasp,
                         const JointVector& q, const CollisionScene& scene,
                         double alpha2, double beta) {
  CostValue out;
  out.gradient = Eigen::VectorXd::Zero(hand.dof());
  if (scene.obstacles.empty() || scene.object_pieces.empty()) return out;

  const FingerFrames frames =
      finger_frames(hand, grasp.thumb, finger_slice(hand, grasp.thumb, q));
  const Pose object_pose = Pose::from_transform(frames.tip) * grasp.thumb_to_object;
  const std::vector<SceneDistance> dists = scene_distances(scene, object_pose);

  const auto thumb_jac = fingertip_jacobian(hand, grasp.thumb, frames);
  const int thumb_off = hand.finger_offset(grasp.thumb);
  const Eigen::Vector3d p_tip = frames.tip.translation();

  // Inside [beta - taper, beta) the hinge blends to zero along the quintic
  // 6t^3 - 8t^4 + 3t^5, whose value and slope match the linear branch at the
  // band's lower edge, vanish together at beta, and whose curvature is zero
  // at both ends. Without the blend the cost has a slope jump at the
  // activation edge, so constrained optima that ride the margin sit exactly
  // on that jump and stall every line search; a blend with curvature jumps
  // at the band edges instead traps quasi-Newton steps in a limit cycle
  // whenever iterates hop across them. (The quintic is monotone on the
  // band: its slope factor 18 - 32t + 15t^2 has negative discriminant.)
  const double taper = std::min(2.5e-3, 0.5 * beta);

  for (size_t w = 0; w < dists.size(); ++w) {
    const double sd = dists[w].signed_distance;
    if (sd >= beta) continue;
    double slope;  // d(penalty)/d(sd), always <= 0
    if (taper > 0.0 && sd > beta - taper) {
      const double t = (beta - sd) / taper;  // in (0, 1)
      out.value += alpha2 * taper * ((6.0 - 8.0 * t + 3.0 * t * t) * t * t * t);
      slope = -alpha2 * ((18.0 - 32.0 * t + 15.0 * t * t) * t * t);
    } else {
      out.value += alpha2 * (beta - sd);
      slope = -alpha2;
    }

    if (sd >= 0.0) {
      // Witness-point chain rule; the object moves rigidly with the tip.
      const Eigen::Vector3d n = dists[w].detail.normal;
      const Eigen::Vector3d wa = dists[w].detail.witness_a;
      for (int j = 0; j < thumb_jac.cols(); ++j) {
        const Eigen::Vector3d v = thumb_jac.col(j).head<3>();
        const Eigen::Vector3d omega = thumb_jac.col(j).tail<3>();
        const double dsd = n.dot(v + omega.cross(wa - p_tip));
        out.gradient[thumb_off + j] += slope * dsd;
      }
    } else {
      // Penetration depth from the expanding-polytope pass is not smooth in
      // the witness points; fall back to central differences.
      const double h = 1e-5;
      for (int j = 0; j < thumb_jac.cols(); ++j) {
        const auto probe = [&](double delta) {
          Eigen::VectorXd qq = q;
          qq[thumb_off + j] += delta;
          const FingerFrames fr = finger_frames(
              hand, grasp.thumb, finger_slice(hand, grasp.thumb, qq));
          const Pose op = Pose::from_transform(fr.tip) * grasp.thumb_to_object;
          return scene_distances(scene, op)[w].signed_distance;
        };
        const double dsd = (probe(h) - probe(-h)) / (2.0 * h);
        out.gradient[thumb_off + j] += slope * dsd;
      }
    }
  }
  return out;
}

std::vector<Pose> waypoint_schedule(const Pose& start, const Pose& goal,
                                    int steps) {
  std::vector<Pose> out;
  out.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    const double s = static_cast<double>(t) / static_cast<double>(steps);
    Pose w;
    w.position = (1.0 - s) * start.position + s * goal.position;
    w.orientation = start.orientation.slerp(s, goal.orientation).normalized();
    out.push_back(w);
  }
  return out;
}

TrajectoryCostValue total_cost(const Eigen::MatrixXd& trajectory,
                               const PlanProblem& problem) {
  const HandModel& hand = *problem.hand;
  const CostWeights& w = problem.weights;
  const int rows = static_cast<int>(trajectory.rows());
  const int last = rows - 1;

  TrajectoryCostValue out;
  out.gradient = Eigen::MatrixXd::Zero(rows, trajectory.cols());

  const auto add_config_term = [&](int t, const CostValue& term, double scale) {
    out.value += scale * term.value;
    out.gradient.row(t) += scale * term.gradient.transpose();
  };

  for (int t = 0; t < rows; ++t) {
    const JointVector q = trajectory.row(t).transpose();

    if (t == last) {
      add_config_term(
          t, object_pose_cost(hand, problem.grasp, q, problem.goal,
                              w.orientation_weight),
          1.0);
    } else if (problem.mode == PlanMode::WaypointInterp) {
      add_config_term(
          t, object_pose_cost(hand, problem.grasp, q, problem.waypoints.at(t),
                              w.orientation_weight),
          w.k1);
    }

    add_config_term(t, relative_position_cost(hand, problem.grasp, q), w.k2);
    add_config_term(
        t, relative_orientation_cost(hand, problem.grasp, q, w.psi), w.k3);

    if (problem.scene) {
      add_config_term(
          t, collision_cost(hand, problem.grasp, q, *problem.scene, w.alpha2,
                            w.beta),
          1.0);
    }
  }

  if (problem.mode == PlanMode::JointAcc) {
    const TrajectoryCostValue acc =
        joint_acceleration_cost(trajectory, w.alpha1);
    out.value += acc.value;
    out.gradient += acc.gradient;
  }
  return out;
}

}  // namespace ingrasp

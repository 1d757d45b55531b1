#include "ingrasp/gradcheck.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>

#include "ingrasp/costs.hpp"
#include "ingrasp/fixtures.hpp"
#include "ingrasp/kinematics.hpp"

namespace ingrasp {

namespace {

constexpr double kEdgeMargin = 0.05;  // distance to branch cuts / gimbal

struct AuditContext {
  HandModel hand;
  GraspSpec grasp;
  Eigen::VectorXd theta0;
  Eigen::VectorXd lo, hi;
  std::mt19937_64 rng;
  std::string corrupt_term;

  explicit AuditContext(const GradientAuditConfig& config)
      : hand(fixtures::demo_hand()),
        grasp(fixtures::demo_grasp_spec(hand)),
        theta0(fixtures::demo_theta0()),
        lo(hand.lower_limits()),
        hi(hand.upper_limits()),
        rng(config.seed),
        corrupt_term(config.corrupt_term) {}

  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  }

  Eigen::VectorXd random_config(double spread) {
    Eigen::VectorXd q(theta0.size());
    for (int j = 0; j < q.size(); ++j) {
      q[j] = std::clamp(theta0[j] + uniform(-spread, spread), lo[j] + 0.02,
                        hi[j] - 0.02);
    }
    return q;
  }

  void corrupt(const std::string& term, Eigen::VectorXd& gradient) const {
    if (term == corrupt_term && gradient.size() > 0) {
      gradient[0] += 0.01 * (1.0 + gradient.cwiseAbs().maxCoeff());
    }
  }
};

// Acceptance guards: the finite-difference comparison is only meaningful
// where the term is smooth.

bool pose_error_away_from_edges(const Pose& tip, const Pose& target_tip) {
  const Eigen::Vector3d rpy = rpy_from_rotation(
      target_tip.rotation().transpose() * tip.rotation());
  return std::abs(rpy[1]) < M_PI / 2.0 - kEdgeMargin &&
         std::abs(rpy[0]) < M_PI - kEdgeMargin &&
         std::abs(rpy[2]) < M_PI - kEdgeMargin;
}

bool directions_away_from_edges(const HandModel& hand, const GraspSpec& grasp,
                                const Eigen::VectorXd& q) {
  const Pose thumb = fk_pose(hand, grasp.thumb, q);
  for (size_t k = 0; k < grasp.grasp_fingers.size(); ++k) {
    const Pose tip = fk_pose(hand, grasp.grasp_fingers[k], q);
    const Eigen::Vector3d d = tip.position - thumb.position;
    if (d.norm() < 1e-6) return false;
    const Eigen::Vector3d u = thumb.orientation.conjugate() * d.normalized();
    if (std::abs(u.z()) > 0.95) return false;
    if (u.x() * u.x() + u.y() * u.y() < kEdgeMargin) return false;
    const Eigen::Vector3d rpy = relative_unit_vector_rpy(thumb, tip);
    for (int c = 0; c < 3; ++c) {
      const double diff =
          wrap_angle(rpy[c] - grasp.initial_relative_rpys[k][c]);
      if (std::abs(diff) > M_PI - kEdgeMargin) return false;
    }
  }
  return true;
}

bool clearances_away_from_kinks(const HandModel& hand, const GraspSpec& grasp,
                                const Eigen::VectorXd& q,
                                const CollisionScene& scene, double beta) {
  const Pose object = grasp.predicted_object_pose(hand, q);
  for (const SceneDistance& d : scene_distances(scene, object)) {
    if (std::abs(d.signed_distance) < 1e-3) return false;
    if (std::abs(d.signed_distance - beta) < 1e-3) return false;
  }
  return true;
}

using ConfigCost = std::function<CostValue(const Eigen::VectorXd&)>;

Eigen::VectorXd fd_gradient(const ConfigCost& cost, const Eigen::VectorXd& q,
                            double h) {
  Eigen::VectorXd g(q.size());
  for (int j = 0; j < q.size(); ++j) {
    Eigen::VectorXd qp = q, qm = q;
    qp[j] += h;
    qm[j] -= h;
    g[j] = (cost(qp).value - cost(qm).value) / (2.0 * h);
  }
  return g;
}

double relative_error(const Eigen::VectorXd& analytic,
                      const Eigen::VectorXd& numeric) {
  const double scale = std::max(numeric.cwiseAbs().maxCoeff(), 1e-6);
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

// Runs one per-configuration term: draws contexts until accepted, then
// compares gradients. `draw` must fill the evaluation closure and return
// the sample configuration, or reject by returning an empty vector.
GradientAuditReport::Term run_term(
    const std::string& name, AuditContext& ctx, int samples, double h,
    const std::function<Eigen::VectorXd(ConfigCost&)>& draw) {
  GradientAuditReport::Term term;
  term.name = name;
  for (int s = 0; s < samples; ++s) {
    ConfigCost cost;
    Eigen::VectorXd q;
    int tries = 0;
    while (q.size() == 0) {
      if (++tries > 500) {
        throw std::runtime_error("gradient audit: no acceptable sample for " +
                                 name);
      }
      cost = nullptr;
      q = draw(cost);
    }
    CostValue v = cost(q);
    ctx.corrupt(name, v.gradient);
    const double err = relative_error(v.gradient, fd_gradient(cost, q, h));
    term.worst_relative_error = std::max(term.worst_relative_error, err);
    ++term.samples;
  }
  return term;
}

CollisionScene audit_scene(AuditContext& ctx) {
  const Pose object = ctx.grasp.predicted_object_pose(ctx.hand, ctx.theta0);
  CollisionScene scene;
  scene.object_pieces.push_back(ConvexShape::sphere(
      0.015, Eigen::Isometry3d::Identity(), "object core"));
  Eigen::Vector3d dir(ctx.uniform(-1.0, 1.0), ctx.uniform(-1.0, 1.0),
                      ctx.uniform(-1.0, 1.0));
  if (dir.norm() < 1e-3) dir = Eigen::Vector3d::UnitX();
  dir.normalize();
  const double reach = ctx.uniform(0.004, 0.045);
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  pose.translation() = object.position + reach * dir;
  scene.obstacles.push_back(ConvexShape::sphere(0.01, pose, "audit obstacle"));
  return scene;
}

}  // namespace

GradientAuditReport run_gradient_audit(const GradientAuditConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  AuditContext ctx(config);
  GradientAuditReport report;
  const int n = config.samples_per_term;

  report.terms.push_back(run_term(
      "object_pose", ctx, n, 1e-6, [&](ConfigCost& cost) -> Eigen::VectorXd {
        const Eigen::VectorXd q = ctx.random_config(0.25);
        const Pose target =
            ctx.grasp.predicted_object_pose(ctx.hand, ctx.random_config(0.3));
        const Pose tip = fk_pose(ctx.hand, ctx.grasp.thumb, q);
        if (!pose_error_away_from_edges(tip, target * ctx.grasp.object_to_thumb)) {
          return {};
        }
        cost = [&hand = ctx.hand, &grasp = ctx.grasp, target](
                   const Eigen::VectorXd& x) {
          return object_pose_cost(hand, grasp, x, target, 1.0);
        };
        return q;
      }));

  report.terms.push_back(run_term(
      "relative_position", ctx, n, 1e-6,
      [&](ConfigCost& cost) -> Eigen::VectorXd {
        cost = [&hand = ctx.hand, &grasp = ctx.grasp](const Eigen::VectorXd& x) {
          return relative_position_cost(hand, grasp, x);
        };
        return ctx.random_config(0.25);
      }));

  report.terms.push_back(run_term(
      "relative_orientation", ctx, n, 1e-6,
      [&](ConfigCost& cost) -> Eigen::VectorXd {
        const Eigen::VectorXd q = ctx.random_config(0.25);
        if (!directions_away_from_edges(ctx.hand, ctx.grasp, q)) return {};
        cost = [&hand = ctx.hand, &grasp = ctx.grasp](const Eigen::VectorXd& x) {
          return relative_orientation_cost(hand, grasp, x,
                                           Eigen::Vector3d(0.0, 1.0, 0.0));
        };
        return q;
      }));

  report.terms.push_back(run_term(
      "collision", ctx, n, 1e-6, [&](ConfigCost& cost) -> Eigen::VectorXd {
        const Eigen::VectorXd q = ctx.random_config(0.2);
        auto scene = std::make_shared<CollisionScene>(audit_scene(ctx));
        if (!clearances_away_from_kinks(ctx.hand, ctx.grasp, q, *scene, 0.005)) {
          return {};
        }
        cost = [&hand = ctx.hand, &grasp = ctx.grasp,
                scene](const Eigen::VectorXd& x) {
          return collision_cost(hand, grasp, x, *scene, 1000.0, 0.005);
        };
        return q;
      }));

  // Joint-acceleration term: quadratic in the trajectory, audited over a
  // flattened random trajectory.
  {
    GradientAuditReport::Term term;
    term.name = "joint_acceleration";
    const int rows = 5;
    const int dof = ctx.hand.dof();
    for (int s = 0; s < n; ++s) {
      Eigen::MatrixXd traj(rows, dof);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < dof; ++c) traj(r, c) = ctx.uniform(-1.0, 1.0);
      }
      TrajectoryCostValue v = joint_acceleration_cost(traj, 0.01);
      Eigen::VectorXd analytic =
          Eigen::Map<Eigen::VectorXd>(v.gradient.data(), v.gradient.size());
      ctx.corrupt(term.name, analytic);
      Eigen::VectorXd numeric(rows * dof);
      int k = 0;
      for (int c = 0; c < dof; ++c) {
        for (int r = 0; r < rows; ++r) {
          const double h = 1e-5;
          Eigen::MatrixXd tp = traj, tm = traj;
          tp(r, c) += h;
          tm(r, c) -= h;
          numeric[k++] = (joint_acceleration_cost(tp, 0.01).value -
                          joint_acceleration_cost(tm, 0.01).value) /
                         (2.0 * h);
        }
      }
      term.worst_relative_error = std::max(
          term.worst_relative_error, relative_error(analytic, numeric));
      ++term.samples;
    }
    report.terms.push_back(term);
  }

  // Full objective over a short trajectory, waypoint mode with collisions.
  {
    GradientAuditReport::Term term;
    term.name = "total";
    const int dof = ctx.hand.dof();
    const int rows = 4;
    for (int s = 0; s < n; ++s) {
      PlanProblem problem;
      Eigen::MatrixXd traj(rows, dof);
      bool ok = false;
      for (int tries = 0; tries < 500 && !ok; ++tries) {
        problem = PlanProblem{};
        problem.hand = &ctx.hand;
        problem.grasp = ctx.grasp;
        problem.initial_object_pose =
            ctx.grasp.predicted_object_pose(ctx.hand, ctx.theta0);
        problem.goal =
            ctx.grasp.predicted_object_pose(ctx.hand, ctx.random_config(0.3));
        problem.steps = rows - 1;
        problem.mode = PlanMode::WaypointInterp;
        problem.waypoints = waypoint_schedule(problem.initial_object_pose,
                                              problem.goal, problem.steps);
        problem.scene = audit_scene(ctx);

        ok = true;
        for (int r = 0; r < rows && ok; ++r) {
          traj.row(r) = ctx.random_config(0.2).transpose();
          const Eigen::VectorXd q = traj.row(r).transpose();
          const Pose tip = fk_pose(ctx.hand, ctx.grasp.thumb, q);
          const Pose target =
              (r == rows - 1 ? problem.goal : problem.waypoints[r]) *
              ctx.grasp.object_to_thumb;
          ok = pose_error_away_from_edges(tip, target) &&
               directions_away_from_edges(ctx.hand, ctx.grasp, q) &&
               clearances_away_from_kinks(ctx.hand, ctx.grasp, q,
                                          *problem.scene,
                                          problem.weights.beta);
        }
      }
      if (!ok) {
        throw std::runtime_error("gradient audit: no acceptable sample for total");
      }

      TrajectoryCostValue v = total_cost(traj, problem);
      Eigen::VectorXd analytic =
          Eigen::Map<Eigen::VectorXd>(v.gradient.data(), v.gradient.size());
      ctx.corrupt(term.name, analytic);
      Eigen::VectorXd numeric(rows * dof);
      int k = 0;
      const double h = 1e-6;
      for (int c = 0; c < dof; ++c) {
        for (int r = 0; r < rows; ++r) {
          Eigen::MatrixXd tp = traj, tm = traj;
          tp(r, c) += h;
          tm(r, c) -= h;
          numeric[k++] = (total_cost(tp, problem).value -
                          total_cost(tm, problem).value) /
                         (2.0 * h);
        }
      }
      term.worst_relative_error = std::max(
          term.worst_relative_error, relative_error(analytic, numeric));
      ++term.samples;
    }
    report.terms.push_back(term);
  }

  report.passed = true;
  for (auto& term : report.terms) {
    term.passed = term.worst_relative_error < config.tolerance;
    report.passed = report.passed && term.passed;
  }
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return report;
}

}  // namespace ingrasp

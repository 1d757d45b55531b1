#include "ingrasp/optimizer.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ingrasp {

Eigen::MatrixXd velocity_residuals(const Eigen::MatrixXd& trajectory, double dt,
                                   double max_joint_speed) {
  const int rows = static_cast<int>(trajectory.rows());
  if (rows < 2) return Eigen::MatrixXd::Zero(0, trajectory.cols());
  Eigen::MatrixXd res(rows - 1, trajectory.cols());
  for (int t = 1; t < rows; ++t) {
    res.row(t - 1) = (trajectory.row(t) - trajectory.row(t - 1)).cwiseAbs() / dt;
  }
  return (res.array() - max_joint_speed).cwiseMax(0.0).matrix();
}

namespace {

Eigen::MatrixXd project(const Eigen::MatrixXd& x, const BoxLimits& limits) {
  return x.cwiseMax(limits.lower).cwiseMin(limits.upper);
}

// Augmented Lagrangian state for the two-sided velocity constraints
// g+ = (dx/dt - vmax) <= 0 and g- = (-dx/dt - vmax) <= 0.
struct Multipliers {
  Eigen::MatrixXd up;    // (rows-1) x cols
  Eigen::MatrixXd down;
};

struct Evaluation {
  double objective = 0.0;   // true objective f
  double augmented = 0.0;   // f + penalty
};

class AugmentedProblem {
 public:
  AugmentedProblem(const TrajectoryObjective& objective, double dt,
                   double vmax)
      : objective_(objective), dt_(dt), vmax_(vmax) {}

  Evaluation evaluate(const Eigen::MatrixXd& x, const Multipliers& lam,
                      double mu, Eigen::MatrixXd* gradient) const {
    Evaluation ev;
    ev.objective = objective_(x, gradient);
    ev.augmented = ev.objective;
    const int rows = static_cast<int>(x.rows());
    for (int t = 1; t < rows; ++t) {
      for (int j = 0; j < x.cols(); ++j) {
        const double rate = (x(t, j) - x(t - 1, j)) / dt_;
        const double gp = rate - vmax_;
        const double gm = -rate - vmax_;
        const double sp = std::max(0.0, lam.up(t - 1, j) + mu * gp);
        const double sm = std::max(0.0, lam.down(t - 1, j) + mu * gm);
        ev.augmented +=
            (sp * sp - lam.up(t - 1, j) * lam.up(t - 1, j)) / (2.0 * mu);
        ev.augmented +=
            (sm * sm - lam.down(t - 1, j) * lam.down(t - 1, j)) / (2.0 * mu);
        if (gradient != nullptr) {
          const double pull = (sp - sm) / dt_;
          (*gradient)(t, j) += pull;
          (*gradient)(t - 1, j) -= pull;
        }
      }
    }
    return ev;
  }

  void update_multipliers(const Eigen::MatrixXd& x, Multipliers& lam,
                          double mu) const {
    const int rows = static_cast<int>(x.rows());
    for (int t = 1; t < rows; ++t) {
      for (int j = 0; j < x.cols(); ++j) {
        const double rate = (x(t, j) - x(t - 1, j)) / dt_;
        lam.up(t - 1, j) =
            std::max(0.0, lam.up(t - 1, j) + mu * (rate - vmax_));
        lam.down(t - 1, j) =
            std::max(0.0, lam.down(t - 1, j) + mu * (-rate - vmax_));
      }
    }
  }

 private:
  const TrajectoryObjective& objective_;
  double dt_;
  double vmax_;
};

}  // namespace

SolveResult minimize_trajectory(const Eigen::MatrixXd& initial,
                                const TrajectoryObjective& objective,
                                const BoxLimits& limits, double dt,
                                double max_joint_speed,
                                const SolverConfig& config) {
  if (dt <= 0.0) throw std::invalid_argument("minimize_trajectory: dt <= 0");
  if (max_joint_speed <= 0.0) {
    throw std::invalid_argument("minimize_trajectory: max_joint_speed <= 0");
  }
  if (initial.rows() != limits.lower.rows() ||
      initial.cols() != limits.lower.cols() ||
      initial.rows() != limits.upper.rows() ||
      initial.cols() != limits.upper.cols()) {
    throw std::invalid_argument(
        "minimize_trajectory: limits shape does not match the trajectory");
  }

  const auto t_start = std::chrono::steady_clock::now();
  const AugmentedProblem problem(objective, dt, max_joint_speed);

  const int rows = static_cast<int>(initial.rows());
  const int cols = static_cast<int>(initial.cols());
  Multipliers lam{Eigen::MatrixXd::Zero(std::max(rows - 1, 0), cols),
                  Eigen::MatrixXd::Zero(std::max(rows - 1, 0), cols)};
  double mu = config.penalty_initial;

  Eigen::MatrixXd x = project(initial, limits);
  Eigen::MatrixXd grad(rows, cols);

  const auto residual_norm = [&](const Eigen::MatrixXd& p) {
    const Eigen::MatrixXd r = velocity_residuals(p, dt, max_joint_speed);
    return r.size() == 0 ? 0.0 : r.maxCoeff();
  };

  SolveResult result;
  result.trajectory = x;
  bool have_best = false;
  double best_objective = 0.0;

  const auto consider = [&](const Eigen::MatrixXd& p, double f) {
    if (residual_norm(p) <= config.feasibility_tol &&
        (!have_best || f < best_objective)) {
      have_best = true;
      best_objective = f;
      result.trajectory = p;
    }
  };

  int iterations = 0;
  double pg_norm = 0.0;
  bool converged = false;
  double previous_violation = std::numeric_limits<double>::infinity();
  // Rounds that consume no inner iterations still count against this cap,
  // so a stalled multiplier loop cannot spin forever.
  int rounds = 0;

  const int n = rows * cols;
  const auto as_vector = [](const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
  };

  while (iterations < config.max_iterations && !converged && rounds < 100) {
    ++rounds;
    // One quasi-Newton round on the augmented objective at fixed
    // multipliers. The curvature model B starts each round at identity
    // (the multiplier/penalty update changes the function) and is kept
    // positive definite by Powell-damped BFGS updates.
    Evaluation ev = problem.evaluate(x, lam, mu, &grad);
    consider(x, ev.objective);
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
    bool scaled = false;

    // The round runs to its own optimality at the current multipliers (or
    // until the line search stalls); truncating it early would update the
    // multipliers at a poor point and discard the curvature model.
    while (iterations < config.max_iterations) {
      pg_norm = (project(x - grad, limits) - x).cwiseAbs().maxCoeff();
      if (pg_norm <= config.optimality_tol) break;

      // Box-constrained quadratic subproblem, two-metric style: coordinates
      // pressed against an eps-active bound take the steepest-descent
      // component (the projection arc re-clips them); the free block takes
      // the Newton step of the damped model B + damping * I.
      const double eps = std::min(1e-4, pg_norm);
      std::vector<int> free_idx;
      free_idx.reserve(n);
      Eigen::VectorXd p(n);
      {
        const Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
        const Eigen::Map<const Eigen::VectorXd> gv(grad.data(), n);
        const Eigen::Map<const Eigen::VectorXd> lov(limits.lower.data(), n);
        const Eigen::Map<const Eigen::VectorXd> hiv(limits.upper.data(), n);
        for (int i = 0; i < n; ++i) {
          const bool pinned_low = xv[i] - lov[i] <= eps && gv[i] > 0.0;
          const bool pinned_high = hiv[i] - xv[i] <= eps && gv[i] < 0.0;
          if (pinned_low || pinned_high) {
            p[i] = -gv[i];
          } else {
            free_idx.push_back(i);
          }
        }
        const int nf = static_cast<int>(free_idx.size());
        if (nf > 0) {
          Eigen::MatrixXd bff(nf, nf);
          Eigen::VectorXd gf(nf);
          for (int a = 0; a < nf; ++a) {
            gf[a] = gv[free_idx[a]];
            for (int b = 0; b < nf; ++b) {
              bff(a, b) = B(free_idx[a], free_idx[b]);
            }
            bff(a, a) += config.damping;
          }
          const Eigen::VectorXd pf = Eigen::LDLT<Eigen::MatrixXd>(bff).solve(-gf);
          // B is positive definite by construction, so pf is a descent
          // direction; fall back to steepest descent if the factorization
          // degenerated numerically.
          const bool usable = pf.allFinite() && gf.dot(pf) < 0.0;
          for (int a = 0; a < nf; ++a) {
            p[free_idx[a]] = usable ? pf[a] : -gf[a];
          }
        }
      }
      const Eigen::Map<const Eigen::MatrixXd> pmat(p.data(), rows, cols);

      // Backtracking along the projection arc P(x + alpha p).
      double alpha = 1.0;
      Eigen::MatrixXd x_trial;
      Evaluation ev_trial;
      bool accepted = false;
      for (int back = 0; back < config.max_backtracks; ++back) {
        x_trial = project(x + alpha * pmat, limits);
        const double gstep = grad.cwiseProduct(x_trial - x).sum();
        if (gstep < -1e-18) {
          ev_trial = problem.evaluate(x_trial, lam, mu, nullptr);
          if (ev_trial.augmented <= ev.augmented + 1e-4 * gstep) {
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      ++iterations;
      if (!accepted) break;

      Eigen::MatrixXd grad_new(rows, cols);
      ev_trial = problem.evaluate(x_trial, lam, mu, &grad_new);
      const Eigen::VectorXd s = as_vector(x_trial) - as_vector(x);
      Eigen::VectorXd y = as_vector(grad_new) - as_vector(grad);
      if (!scaled) {
        // First curvature pair of the round calibrates the overall scale
        // of the identity model before the rank-two update refines shape.
        const double sy0 = s.dot(y);
        const double yy0 = y.dot(y);
        if (sy0 > 0.0 && yy0 > 0.0) B *= yy0 / sy0;
        scaled = true;
      }
      const Eigen::VectorXd bs = B * s;
      const double sbs = s.dot(bs);
      double sy = s.dot(y);
      if (sbs > 0.0) {
        if (sy < 0.2 * sbs) {
          const double theta = 0.8 * sbs / (sbs - sy);
          y = theta * y + (1.0 - theta) * bs;
          sy = s.dot(y);
        }
        if (sy > 1e-18) {
          B.noalias() += (y * y.transpose()) / sy;
          B.noalias() -= (bs * bs.transpose()) / sbs;
        }
      }

      x = x_trial;
      grad = grad_new;
      ev = ev_trial;
      consider(x, ev.objective);
    }

    const double violation = residual_norm(x);
    pg_norm = (project(x - grad, limits) - x).cwiseAbs().maxCoeff();
    if (violation <= config.feasibility_tol &&
        pg_norm <= config.optimality_tol) {
      converged = true;
      break;
    }

    problem.update_multipliers(x, lam, mu);
    if (violation > 0.25 * previous_violation) {
      mu = std::min(mu * config.penalty_growth, config.penalty_max);
    }
    previous_violation = violation;
  }

  if (!have_best) result.trajectory = x;

  Eigen::MatrixXd grad_final(rows, cols);
  const Evaluation ev_final =
      problem.evaluate(result.trajectory, lam, mu, &grad_final);
  result.report.converged = converged;
  result.report.iterations = iterations;
  result.report.objective = ev_final.objective;
  result.report.max_velocity_residual = residual_norm(result.trajectory);
  result.report.projected_gradient_norm =
      (project(result.trajectory - grad_final, limits) - result.trajectory)
          .cwiseAbs()
          .maxCoeff();
  result.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

}  // namespace ingrasp

#pragma once

#include <Eigen/Core>
#include <functional>

namespace ingrasp {

/// Box bounds on every trajectory entry. Rows of lower/upper match the
/// trajectory layout; pinning a row is expressed by equal bounds.
struct BoxLimits {
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;
};

struct SolverConfig {
  int max_iterations = 5000;        // total inner iterations across rounds
  double optimality_tol = 1e-6;     // projected-gradient infinity norm
  double feasibility_tol = 1e-6;    // velocity residual infinity norm
  double penalty_initial = 10.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e8;
  double damping = 1e-8;            // added to quadratic-subproblem diagonals
  int max_backtracks = 40;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;             // true objective at the returned point
  double max_velocity_residual = 0.0; // of the returned point
  double projected_gradient_norm = 0.0;
  double wall_time_s = 0.0;
};

/// Objective callback: returns the cost at `x` and, when `gradient` is
/// non-null, fills it (same shape as `x`). The solver only ever calls it
/// at points inside the box.
using TrajectoryObjective =
    std::function<double(const Eigen::MatrixXd& x, Eigen::MatrixXd* gradient)>;

struct SolveResult {
  Eigen::MatrixXd trajectory;
  SolveReport report;
};

/// Minimizes the objective over trajectories subject to per-entry box
/// limits and per-step joint speed limits |x(t,j) - x(t-1,j)| / dt <=
/// max_joint_speed. The speed limits enter through an augmented Lagrangian
/// whose multipliers update between rounds; each round is a quasi-Newton
/// sequence whose steps come from box-constrained quadratic subproblems
/// (free coordinates take the damped-BFGS Newton step, bound-riding ones
/// steepest descent, and the projection arc enforces the box exactly).
///
/// Deterministic: no randomness, no concurrency; identical inputs produce
/// bit-identical outputs. The returned trajectory is the best iterate seen
/// whose velocity residual is within the feasibility tolerance; since the
/// initial point is expected feasible, the returned objective never
/// exceeds the initial one.
SolveResult minimize_trajectory(const Eigen::MatrixXd& initial,
                                const TrajectoryObjective& objective,
                                const BoxLimits& limits, double dt,
                                double max_joint_speed,
                                const SolverConfig& config = {});

/// Velocity-limit residuals max(0, |x(t,j) - x(t-1,j)|/dt - max_joint_speed)
/// for t in [1, rows); zero rows when the trajectory has fewer than 2 rows.
Eigen::MatrixXd velocity_residuals(const Eigen::MatrixXd& trajectory, double dt,
                                   double max_joint_speed);

}  // namespace ingrasp

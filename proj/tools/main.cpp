// Command-line front end for the in-grasp repositioning toolkit.
//
//   plan      optimize a joint trajectory that carries the grasped object
//             to a goal pose, write it as a plan document
//   simulate  roll a plan document through the disturbance simulator,
//             write a trace CSV and a metrics JSON
//   evaluate  batch-plan a goal set and compare open-loop vs feedback
//             execution over seeded trials, write a results table
//   gradcheck audit every analytic cost gradient against finite
//             differences
//
// Exit codes: 0 success, 1 bad input, 2 planner did not converge,
// 3 audit failure (collision audit for plan, gradient audit for
// gradcheck).

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ingrasp/feedback.hpp"
#include "ingrasp/geometry.hpp"
#include "ingrasp/gradcheck.hpp"
#include "ingrasp/grasp.hpp"
#include "ingrasp/hand_model.hpp"
#include "ingrasp/io.hpp"
#include "ingrasp/planner.hpp"
#include "ingrasp/pose.hpp"
#include "ingrasp/simulator.hpp"

namespace {

using namespace ingrasp;

/// Shortest-round-trip decimal form, used everywhere a double lands in an
/// output table so reruns are byte-identical.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_u64(std::uint64_t v) {
  return std::to_string(static_cast<unsigned long long>(v));
}

// ---------------------------------------------------------------------------
// Flag bundles shared between subcommands.

struct PlannerFlags {
  std::string mode = "waypoint-interp";
  int steps = 10;
  double dt = 0.167;
  double vmax = 0.6;
  int resolution = 100;
  int max_iters = 5000;

  void attach(CLI::App& cmd) {
    cmd.add_option("--mode", mode,
                   "Smoothness mode: waypoint-interp or joint-acc")
        ->check(CLI::IsMember({"waypoint-interp", "joint-acc"}))
        ->capture_default_str();
    cmd.add_option("--steps", steps, "Coarse steps T (the plan has T+1 rows)")
        ->capture_default_str();
    cmd.add_option("--dt", dt, "Coarse step duration, seconds")
        ->capture_default_str();
    cmd.add_option("--vmax", vmax, "Joint speed limit, rad/s")
        ->capture_default_str();
    cmd.add_option("--resolution", resolution, "Dense rows after upsampling")
        ->capture_default_str();
    cmd.add_option("--max-iters", max_iters, "Solver inner-iteration budget")
        ->capture_default_str();
  }

  PlannerConfig config() const {
    PlannerConfig cfg;
    cfg.steps = steps;
    cfg.dt = dt;
    cfg.max_joint_speed = vmax;
    cfg.dense_resolution = resolution;
    cfg.mode =
        mode == "joint-acc" ? PlanMode::JointAcc : PlanMode::WaypointInterp;
    cfg.solver.max_iterations = max_iters;
    return cfg;
  }

  void echo(std::map<std::string, std::string>& out) const {
    out["mode"] = mode;
    out["steps"] = std::to_string(steps);
    out["dt"] = fmt(dt);
    out["vmax"] = fmt(vmax);
    out["resolution"] = std::to_string(resolution);
    out["max_iters"] = std::to_string(max_iters);
  }
};

struct SimFlags {
  double lag = 0.3;
  double joint_noise = 0.002;
  double slip_trans = 0.0005;
  double slip_rot = 0.005;
  double gain = 50.0;
  double orientation_weight = 0.0;

  void attach(CLI::App& cmd) {
    cmd.add_option("--lag", lag, "First-order joint tracking lag in [0,1)")
        ->capture_default_str();
    cmd.add_option("--joint-noise", joint_noise,
                   "Per-step joint noise std, rad")
        ->capture_default_str();
    cmd.add_option("--slip-trans", slip_trans,
                   "Per-step attachment slip std, m")
        ->capture_default_str();
    cmd.add_option("--slip-rot", slip_rot,
                   "Per-step attachment slip std, rad")
        ->capture_default_str();
    cmd.add_option("--gain", gain, "Feedback correction gain")
        ->capture_default_str();
    cmd.add_option("--orientation-weight", orientation_weight,
                   "Angular-error weight inside the feedback correction")
        ->capture_default_str();
  }

  SimulationConfig config(std::uint64_t seed, bool use_feedback) const {
    SimulationConfig cfg;
    cfg.disturbance.joint_lag = lag;
    cfg.disturbance.joint_noise_std = joint_noise;
    cfg.disturbance.slip_translation_std = slip_trans;
    cfg.disturbance.slip_rotation_std = slip_rot;
    cfg.seed = seed;
    cfg.use_feedback = use_feedback;
    cfg.feedback.gain = gain;
    cfg.feedback.orientation_weight = orientation_weight;
    return cfg;
  }

  void echo(std::map<std::string, std::string>& out) const {
    out["lag"] = fmt(lag);
    out["joint_noise"] = fmt(joint_noise);
    out["slip_trans"] = fmt(slip_trans);
    out["slip_rot"] = fmt(slip_rot);
    out["gain"] = fmt(gain);
    out["orientation_weight"] = fmt(orientation_weight);
  }
};

// ---------------------------------------------------------------------------
// Shared input loading.

struct LoadedGrasp {
  HandModel hand;
  GraspFile file;
  GraspSpec spec;
};

LoadedGrasp load_grasp_inputs(const std::string& grasp_path,
                              const std::string& hand_override) {
  LoadedGrasp in;
  in.file = load_grasp_file(grasp_path);
  in.hand = load_hand_model_file(
      hand_override.empty() ? in.file.hand_model_path : hand_override);
  const int thumb = in.hand.finger_index(in.file.thumb);
  std::vector<int> grasp_fingers;
  grasp_fingers.reserve(in.file.grasp_fingers.size());
  for (const auto& name : in.file.grasp_fingers) {
    grasp_fingers.push_back(in.hand.finger_index(name));
  }
  in.spec = make_grasp_spec(in.hand, in.file.theta0, thumb, grasp_fingers,
                            in.file.object_pose);
  return in;
}

Pose parse_goal(const std::string& text) {
  std::istringstream stream(text);
  Eigen::Vector3d xyz;
  Eigen::Vector3d rpy;
  if (!(stream >> xyz.x() >> xyz.y() >> xyz.z() >> rpy.x() >> rpy.y() >>
        rpy.z())) {
    throw ParseError("--goal expects six numbers \"x y z roll pitch yaw\", got '" +
                     text + "'");
  }
  std::string extra;
  if (stream >> extra) {
    throw ParseError("--goal expects exactly six numbers, got '" + text + "'");
  }
  return Pose::from_xyz_rpy(xyz, rpy);
}

std::vector<std::pair<std::string, std::string>> echo_to_vector(
    const std::map<std::string, std::string>& echo) {
  return {echo.begin(), echo.end()};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ParseError("cannot write file '" + path + "'");
}

/// Linear-interpolation quantile of a sample (the spreadsheet convention):
/// index h = (n - 1) p, value x[floor h] + frac(h) * (x[floor h + 1] - x[floor h]).
double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

// ---------------------------------------------------------------------------
// plan

struct PlanArgs {
  std::string grasp_path;
  std::string hand_path;
  std::string goal_text;
  std::string scene_path;
  std::string out_path = "plan.json";
  PlannerFlags planner;
};

int cmd_plan(const PlanArgs& args) {
  const LoadedGrasp in = load_grasp_inputs(args.grasp_path, args.hand_path);
  const Pose goal = parse_goal(args.goal_text);
  std::optional<CollisionScene> scene;
  if (!args.scene_path.empty()) scene = load_scene_file(args.scene_path);

  const PlannerConfig config = args.planner.config();
  const PlanResult result =
      plan(in.hand, in.spec, in.file.theta0, goal, scene, config);

  PlanDocument doc;
  doc.hand_name = in.hand.name;
  doc.mode = args.planner.mode;
  doc.max_joint_speed = config.max_joint_speed;
  doc.goal = goal;
  doc.coarse = result.coarse;
  doc.dense = result.dense;
  doc.predicted_path = result.predicted_object_path;
  doc.converged = result.report.converged;
  doc.iterations = result.report.iterations;
  doc.objective = result.report.objective;
  doc.position_error_m = result.position_error_m;
  doc.orientation_error_pct = result.orientation_error_pct;
  doc.collision_audit_failed = result.collision_audit_failed;
  if (scene) doc.min_clearance_m = result.min_clearance_m;

  std::map<std::string, std::string> echo;
  args.planner.echo(echo);
  echo["grasp"] = args.grasp_path;
  echo["hand"] = in.hand.name;
  echo["goal"] = args.goal_text;
  echo["scene"] = args.scene_path;
  doc.config_echo = echo_to_vector(echo);

  save_plan_document(args.out_path, doc);

  std::printf("hand '%s' (%d dof), mode %s, %d coarse steps\n",
              in.hand.name.c_str(), in.hand.dof(), doc.mode.c_str(),
              config.steps);
  std::printf("converged %s after %d iterations, objective %.6g\n",
              doc.converged ? "yes" : "no", doc.iterations, doc.objective);
  std::printf("predicted position error %.3f mm, orientation error %.3f %%\n",
              1000.0 * doc.position_error_m, doc.orientation_error_pct);
  if (doc.min_clearance_m) {
    std::printf("min clearance %.3f mm (%s)\n", 1000.0 * *doc.min_clearance_m,
                doc.collision_audit_failed ? "COLLISION" : "clear");
  }
  std::printf("wrote %s\n", args.out_path.c_str());

  if (!doc.converged) {
    std::fprintf(stderr,
                 "plan did not converge within %d iterations "
                 "(max velocity residual %.3g, projected gradient %.3g)\n",
                 config.solver.max_iterations,
                 result.report.max_velocity_residual,
                 result.report.projected_gradient_norm);
    return 2;
  }
  if (doc.collision_audit_failed) {
    std::fprintf(stderr, "collision audit failed: min clearance %.6f m\n",
                 result.min_clearance_m);
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string plan_path;
  std::string grasp_path;
  std::string hand_path;
  std::string out_prefix = "sim";
  std::uint64_t seed = 0;
  bool feedback = false;
  bool jacobian_at_planned = false;
  SimFlags sim;
};

int cmd_simulate(const SimulateArgs& args) {
  const PlanDocument doc = load_plan_document(args.plan_path);
  const LoadedGrasp in = load_grasp_inputs(args.grasp_path, args.hand_path);
  if (doc.hand_name != in.hand.name) {
    throw ParseError("plan document was made for hand '" + doc.hand_name +
                     "' but the grasp resolves to hand '" + in.hand.name + "'");
  }
  if (doc.dense.steps.cols() != in.hand.dof()) {
    throw ParseError("plan document has " +
                     std::to_string(doc.dense.steps.cols()) +
                     " joint columns but hand '" + in.hand.name + "' has " +
                     std::to_string(in.hand.dof()));
  }

  SimulationConfig config = args.sim.config(args.seed, args.feedback);
  config.feedback.jacobian_at_measured = !args.jacobian_at_planned;
  const ExecutionTrace trace =
      simulate(in.hand, in.spec, doc.dense, doc.predicted_path, config);

  const Metrics metrics = compute_metrics(
      trace.object_poses.back(), doc.predicted_path.front(), doc.goal);

  std::map<std::string, std::string> echo;
  args.sim.echo(echo);
  echo["plan"] = args.plan_path;
  echo["grasp"] = args.grasp_path;
  echo["hand"] = in.hand.name;
  echo["seed"] = fmt_u64(args.seed);
  echo["feedback"] = args.feedback ? "true" : "false";
  echo["jacobian_site"] = args.jacobian_at_planned ? "planned" : "measured";

  const std::string trace_path = args.out_prefix + ".trace.csv";
  const std::string metrics_path = args.out_prefix + ".metrics.json";
  write_trace_csv(trace_path, trace, doc.dense.dt);
  write_metrics_json(metrics_path, metrics, doc, echo_to_vector(echo));

  std::printf("simulated %d steps (%s, seed %s)\n",
              static_cast<int>(trace.commanded.rows()),
              args.feedback ? "feedback" : "open loop",
              fmt_u64(args.seed).c_str());
  std::printf("final position error %.4f cm", metrics.position_error_cm);
  if (metrics.position_error_pct) {
    std::printf(" (%.2f %% of commanded travel)", *metrics.position_error_pct);
  }
  std::printf("\nfinal orientation error %.4f %%\n",
              metrics.orientation_error_pct);
  std::printf("wrote %s and %s\n", trace_path.c_str(), metrics_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string grasp_path;
  std::string goals_path;
  std::string hand_path;
  std::string scene_path;
  std::string out_path = "evaluate.csv";
  int trials = 5;
  std::uint64_t seed_base = 0;
  PlannerFlags planner;
  SimFlags sim;
};

int cmd_evaluate(const EvaluateArgs& args) {
  // Every input is loaded and validated before the first plan so a bad
  // file aborts immediately.
  const LoadedGrasp in = load_grasp_inputs(args.grasp_path, args.hand_path);
  const std::vector<Pose> goals = load_goals_file(args.goals_path);
  if (goals.empty()) {
    throw ParseError("goals file '" + args.goals_path + "' lists no goals");
  }
  if (args.trials < 1) throw ParseError("--trials must be at least 1");
  std::optional<CollisionScene> scene;
  if (!args.scene_path.empty()) scene = load_scene_file(args.scene_path);

  const PlannerConfig config = args.planner.config();

  std::vector<PlanResult> plans;
  plans.reserve(goals.size());
  for (std::size_t g = 0; g < goals.size(); ++g) {
    plans.push_back(plan(in.hand, in.spec, in.file.theta0, goals[g], scene,
                         config));
    const PlanResult& res = plans.back();
    std::printf(
        "goal %zu: converged %s, %d iterations, predicted position error "
        "%.3f mm, orientation error %.3f %%\n",
        g, res.report.converged ? "yes" : "no", res.report.iterations,
        1000.0 * res.position_error_m, res.orientation_error_pct);
    if (!res.report.converged) {
      std::fprintf(stderr, "goal %zu did not converge; aborting\n", g);
      return 2;
    }
  }

  std::map<std::string, std::string> echo;
  args.planner.echo(echo);
  args.sim.echo(echo);
  echo["grasp"] = args.grasp_path;
  echo["goals"] = args.goals_path;
  echo["hand"] = in.hand.name;
  echo["scene"] = args.scene_path;
  echo["trials"] = std::to_string(args.trials);
  echo["seed_base"] = fmt_u64(args.seed_base);

  std::string out;
  for (const auto& [key, value] : echo) {
    out += "# " + key + "=" + value + "\n";
  }
  out +=
      "goal,trial,seed,open_pos_err_cm,open_orient_err_pct,"
      "fb_pos_err_cm,fb_orient_err_pct\n";

  constexpr const char* kMetricNames[4] = {
      "open_pos_err_cm", "open_orient_err_pct", "fb_pos_err_cm",
      "fb_orient_err_pct"};
  std::vector<std::array<std::vector<double>, 4>> samples(goals.size());

  for (std::size_t g = 0; g < goals.size(); ++g) {
    const PlanResult& res = plans[g];
    const Pose initial = res.predicted_object_path.front();
    for (int trial = 0; trial < args.trials; ++trial) {
      const std::uint64_t seed = args.seed_base +
                                 10000 * static_cast<std::uint64_t>(g) +
                                 static_cast<std::uint64_t>(trial);
      // The feedback controller consumes nothing from the disturbance
      // stream, so both arms of a trial see identical disturbances when
      // they share a seed.
      const ExecutionTrace open_trace =
          simulate(in.hand, in.spec, res.dense, res.predicted_object_path,
                   args.sim.config(seed, false));
      const ExecutionTrace fb_trace =
          simulate(in.hand, in.spec, res.dense, res.predicted_object_path,
                   args.sim.config(seed, true));
      const Metrics open = compute_metrics(open_trace.object_poses.back(),
                                           initial, goals[g]);
      const Metrics fb =
          compute_metrics(fb_trace.object_poses.back(), initial, goals[g]);

      const double row[4] = {open.position_error_cm, open.orientation_error_pct,
                             fb.position_error_cm, fb.orientation_error_pct};
      for (int m = 0; m < 4; ++m) samples[g][m].push_back(row[m]);
      out += std::to_string(g) + "," + std::to_string(trial) + "," +
             fmt_u64(seed) + "," + fmt(row[0]) + "," + fmt(row[1]) + "," +
             fmt(row[2]) + "," + fmt(row[3]) + "\n";
    }
  }

  out += "agg_goal,metric,min,q1,median,q3,max\n";
  int feedback_wins = 0;
  for (std::size_t g = 0; g < goals.size(); ++g) {
    for (int m = 0; m < 4; ++m) {
      const std::vector<double>& column = samples[g][m];
      out += std::to_string(g) + "," + kMetricNames[m] + "," +
             fmt(quantile(column, 0.0)) + "," + fmt(quantile(column, 0.25)) +
             "," + fmt(quantile(column, 0.5)) + "," +
             fmt(quantile(column, 0.75)) + "," + fmt(quantile(column, 1.0)) +
             "\n";
    }
    const double open_median = quantile(samples[g][0], 0.5);
    const double fb_median = quantile(samples[g][2], 0.5);
    if (fb_median <= open_median) ++feedback_wins;
    std::printf(
        "goal %zu: median position error %.4f cm open loop, %.4f cm with "
        "feedback\n",
        g, open_median, fb_median);
  }

  write_text_file(args.out_path, out);
  std::printf(
      "wrote %s; feedback median <= open-loop median on %d/%zu goals\n",
      args.out_path.c_str(), feedback_wins, goals.size());
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
  std::uint64_t seed = 2024;
  int samples = 120;
  double tolerance = 1e-5;
  std::string corrupt;
};

int cmd_gradcheck(const GradcheckArgs& args) {
  GradientAuditConfig config;
  config.seed = args.seed;
  config.samples_per_term = args.samples;
  config.tolerance = args.tolerance;
  config.corrupt_term = args.corrupt;
  const GradientAuditReport report = run_gradient_audit(config);

  for (const auto& term : report.terms) {
    std::printf("term %-22s %4d samples, worst relative error %.3e  [%s]\n",
                term.name.c_str(), term.samples, term.worst_relative_error,
                term.passed ? "pass" : "FAIL");
  }
  std::printf("audit %s in %.2f s (seed %s, tolerance %g)\n",
              report.passed ? "PASSED" : "FAILED", report.seconds,
              fmt_u64(args.seed).c_str(), args.tolerance);

  if (!report.passed) {
    std::string failing;
    for (const auto& term : report.terms) {
      if (term.passed) continue;
      if (!failing.empty()) failing += ", ";
      failing += term.name;
    }
    std::fprintf(stderr, "gradient audit failed for %s (seed %s)\n",
                 failing.c_str(), fmt_u64(args.seed).c_str());
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "In-grasp object repositioning: trajectory planning, disturbance "
      "simulation, batch evaluation, and gradient auditing"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  CLI::App* plan_cmd =
      app.add_subcommand("plan", "Plan a trajectory to an object goal pose");
  plan_cmd->add_option("--grasp", plan_args.grasp_path,
                       "Grasp description JSON")
      ->required();
  plan_cmd->add_option("--hand", plan_args.hand_path,
                       "Hand model JSON (overrides the grasp's reference)");
  plan_cmd->add_option("--goal", plan_args.goal_text,
                       "Goal object pose \"x y z roll pitch yaw\" (m, rad)")
      ->required();
  plan_cmd->add_option("--scene", plan_args.scene_path,
                       "Collision scene JSON");
  plan_cmd->add_option("--out", plan_args.out_path, "Plan document path")
      ->capture_default_str();
  plan_args.planner.attach(*plan_cmd);

  SimulateArgs sim_args;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Execute a plan document under disturbances");
  sim_cmd->add_option("--plan", sim_args.plan_path, "Plan document JSON")
      ->required();
  sim_cmd->add_option("--grasp", sim_args.grasp_path, "Grasp description JSON")
      ->required();
  sim_cmd->add_option("--hand", sim_args.hand_path,
                      "Hand model JSON (overrides the grasp's reference)");
  sim_cmd->add_option("--seed", sim_args.seed, "Disturbance random seed")
      ->capture_default_str();
  sim_cmd->add_flag("--feedback", sim_args.feedback,
                    "Enable the pose-feedback controller");
  sim_cmd->add_flag("--jacobian-at-planned", sim_args.jacobian_at_planned,
                    "Evaluate the feedback Jacobian at the planned "
                    "configuration instead of the measured one");
  sim_cmd->add_option("--out", sim_args.out_prefix,
                      "Output prefix (writes PREFIX.trace.csv and "
                      "PREFIX.metrics.json)")
      ->capture_default_str();
  sim_args.sim.attach(*sim_cmd);

  EvaluateArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate",
      "Plan a goal set and compare open-loop vs feedback execution");
  eval_cmd->add_option("--grasp", eval_args.grasp_path,
                       "Grasp description JSON")
      ->required();
  eval_cmd->add_option("--goals", eval_args.goals_path, "Goal set JSON")
      ->required();
  eval_cmd->add_option("--hand", eval_args.hand_path,
                       "Hand model JSON (overrides the grasp's reference)");
  eval_cmd->add_option("--scene", eval_args.scene_path,
                       "Collision scene JSON");
  eval_cmd->add_option("--trials", eval_args.trials,
                       "Seeded disturbance trials per goal")
      ->capture_default_str();
  eval_cmd
      ->add_option("--seed-base,--seed", eval_args.seed_base,
                   "Base seed; trial seeds are base + 10000*goal + trial")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_args.out_path, "Results table path")
      ->capture_default_str();
  eval_args.planner.attach(*eval_cmd);
  eval_args.sim.attach(*eval_cmd);

  GradcheckArgs grad_args;
  CLI::App* grad_cmd = app.add_subcommand(
      "gradcheck", "Audit analytic cost gradients against finite differences");
  grad_cmd->add_option("--seed", grad_args.seed, "Configuration sampling seed")
      ->capture_default_str();
  grad_cmd->add_option("--samples", grad_args.samples, "Samples per term")
      ->capture_default_str();
  grad_cmd
      ->add_option("--tolerance", grad_args.tolerance,
                   "Worst allowed relative error")
      ->capture_default_str();
  grad_cmd->add_option("--corrupt", grad_args.corrupt,
                       "Deliberately perturb this term's analytic gradient "
                       "(the audit must then fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (plan_cmd->parsed()) return cmd_plan(plan_args);
    if (sim_cmd->parsed()) return cmd_simulate(sim_args);
    if (eval_cmd->parsed()) return cmd_evaluate(eval_args);
    if (grad_cmd->parsed()) return cmd_gradcheck(grad_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

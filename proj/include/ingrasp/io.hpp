#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ingrasp/geometry.hpp"
#include "ingrasp/hand_model.hpp"
#include "ingrasp/planner.hpp"
#include "ingrasp/pose.hpp"
#include "ingrasp/simulator.hpp"

namespace ingrasp {

/// Parses a hand model from JSON text. Throws ParseError with the
/// offending field on malformed input; the returned model is validated.
HandModel parse_hand_model(const std::string& text);
HandModel load_hand_model_file(const std::string& path);

/// Grasp description as stored on disk. The hand model is referenced by
/// path (relative paths resolve against the grasp file's directory).
struct GraspFile {
  std::string hand_model_path;
  Eigen::VectorXd theta0;
  std::string thumb;
  std::vector<std::string> grasp_fingers;
  Pose object_pose;
};
GraspFile parse_grasp(const std::string& text, const std::string& base_dir = "");
GraspFile load_grasp_file(const std::string& path);

CollisionScene parse_scene(const std::string& text);
CollisionScene load_scene_file(const std::string& path);

/// Goal poses: {"goals": [{"xyz": [...], "rpy": [...]}]}.
std::vector<Pose> load_goals_file(const std::string& path);

/// Everything a later simulation run needs from a planning run.
struct PlanDocument {
  std::string hand_name;
  std::string mode;  // "waypoint-interp" or "joint-acc"
  double max_joint_speed = 0.0;
  Pose goal;
  Trajectory coarse;
  Trajectory dense;
  std::vector<Pose> predicted_path;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  double position_error_m = 0.0;
  double orientation_error_pct = 0.0;
  bool collision_audit_failed = false;
  std::optional<double> min_clearance_m;
  /// Resolved settings the producing command ran with, echoed so the
  /// document is re-runnable on its own. Stored sorted by key.
  std::vector<std::pair<std::string, std::string>> config_echo;
};

void save_plan_document(const std::string& path, const PlanDocument& doc);
PlanDocument load_plan_document(const std::string& path);

/// Writes one row per step: step, time, commanded joints, realized joints,
/// object pose (xyz + wxyz quaternion). Deterministic formatting.
void write_trace_csv(const std::string& path, const ExecutionTrace& trace,
                     double dt);

void write_metrics_json(
    const std::string& path, const Metrics& simulated, const PlanDocument& plan,
    const std::vector<std::pair<std::string, std::string>>& config_echo = {});

}  // namespace ingrasp

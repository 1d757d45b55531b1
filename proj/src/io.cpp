#include "ingrasp/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ingrasp {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << text;
  if (!out) throw ParseError("failed to write file: " + path);
}

json parse_json(const std::string& text, const std::string& context) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(context + ": " + e.what());
  }
}

const json& require(const json& j, const char* key, const std::string& context) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(context + ": missing field '" + key + "'");
  }
  return *it;
}

double require_number(const json& j, const char* key,
                      const std::string& context) {
  const json& v = require(j, key, context);
  if (!v.is_number()) {
    throw ParseError(context + ": field '" + key + "' must be a number");
  }
  return v.get<double>();
}

std::string require_string(const json& j, const char* key,
                           const std::string& context) {
  const json& v = require(j, key, context);
  if (!v.is_string()) {
    throw ParseError(context + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

Eigen::Vector3d require_vec3(const json& j, const char* key,
                             const std::string& context) {
  const json& v = require(j, key, context);
  if (!v.is_array() || v.size() != 3) {
    throw ParseError(context + ": field '" + key +
                     "' must be an array of 3 numbers");
  }
  Eigen::Vector3d out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) {
      throw ParseError(context + ": field '" + key +
                       "' must be an array of 3 numbers");
    }
    out[i] = v[i].get<double>();
  }
  return out;
}

Eigen::Vector3d optional_vec3(const json& j, const char* key,
                              const std::string& context) {
  if (!j.contains(key)) return Eigen::Vector3d::Zero();
  return require_vec3(j, key, context);
}

Eigen::VectorXd require_vector(const json& j, const char* key,
                               const std::string& context) {
  const json& v = require(j, key, context);
  if (!v.is_array()) {
    throw ParseError(context + ": field '" + key + "' must be an array");
  }
  Eigen::VectorXd out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ParseError(context + ": field '" + key +
                       "' must contain only numbers");
    }
    out[static_cast<int>(i)] = v[i].get<double>();
  }
  return out;
}

json vec_to_json(const Eigen::Vector3d& v) { return json{v.x(), v.y(), v.z()}; }

json pose_to_json(const Pose& p) {
  return json{{"xyz", vec_to_json(p.position)},
              {"quat_wxyz",
               {p.orientation.w(), p.orientation.x(), p.orientation.y(),
                p.orientation.z()}}};
}

Pose pose_from_json(const json& j, const std::string& context) {
  const Eigen::Vector3d xyz = require_vec3(j, "xyz", context);
  const json& q = require(j, "quat_wxyz", context);
  if (!q.is_array() || q.size() != 4) {
    throw ParseError(context + ": field 'quat_wxyz' must be an array of 4 numbers");
  }
  return Pose::from_parts(
      xyz, Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(),
                              q[2].get<double>(), q[3].get<double>()));
}

json trajectory_to_json(const Trajectory& t) {
  json steps = json::array();
  for (int r = 0; r < t.steps.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < t.steps.cols(); ++c) row.push_back(t.steps(r, c));
    steps.push_back(std::move(row));
  }
  return json{{"dt", t.dt}, {"steps", std::move(steps)}};
}

Trajectory trajectory_from_json(const json& j, const std::string& context) {
  Trajectory t;
  t.dt = require_number(j, "dt", context);
  const json& steps = require(j, "steps", context);
  if (!steps.is_array() || steps.empty() || !steps[0].is_array()) {
    throw ParseError(context + ": field 'steps' must be an array of rows");
  }
  const size_t cols = steps[0].size();
  t.steps.resize(steps.size(), cols);
  for (size_t r = 0; r < steps.size(); ++r) {
    if (!steps[r].is_array() || steps[r].size() != cols) {
      throw ParseError(context + ": trajectory rows have inconsistent widths");
    }
    for (size_t c = 0; c < cols; ++c) {
      t.steps(static_cast<int>(r), static_cast<int>(c)) =
          steps[r][c].get<double>();
    }
  }
  return t;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

HandModel parse_hand_model(const std::string& text) {
  const json j = parse_json(text, "hand model");
  HandModel m;
  m.name = require_string(j, "name", "hand model");
  const json& fingers = require(j, "fingers", "hand model");
  if (!fingers.is_array()) {
    throw ParseError("hand model: field 'fingers' must be an array");
  }
  for (const json& fj : fingers) {
    Finger f;
    f.name = require_string(fj, "name", "hand model finger");
    const std::string ctx = "finger '" + f.name + "'";
    const json& joints = require(fj, "joints", ctx);
    if (!joints.is_array()) {
      throw ParseError(ctx + ": field 'joints' must be an array");
    }
    for (size_t k = 0; k < joints.size(); ++k) {
      const std::string jctx = ctx + " joint " + std::to_string(k);
      const json& jj = joints[k];
      Joint joint;
      joint.origin_xyz = require_vec3(jj, "origin_xyz", jctx);
      joint.origin_rpy = require_vec3(jj, "origin_rpy", jctx);
      joint.axis = require_vec3(jj, "axis", jctx);
      joint.limit_lower = require_number(jj, "limit_lower", jctx);
      joint.limit_upper = require_number(jj, "limit_upper", jctx);
      f.joints.push_back(joint);
    }
    f.tip_xyz = require_vec3(fj, "tip_xyz", ctx);
    f.tip_rpy = require_vec3(fj, "tip_rpy", ctx);
    m.fingers.push_back(std::move(f));
  }
  m.validate();
  return m;
}

HandModel load_hand_model_file(const std::string& path) {
  try {
    return parse_hand_model(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

GraspFile parse_grasp(const std::string& text, const std::string& base_dir) {
  const json j = parse_json(text, "grasp");
  GraspFile g;
  g.hand_model_path = require_string(j, "hand_model", "grasp");
  if (!base_dir.empty() &&
      !std::filesystem::path(g.hand_model_path).is_absolute()) {
    g.hand_model_path =
        (std::filesystem::path(base_dir) / g.hand_model_path).string();
  }
  g.theta0 = require_vector(j, "theta0", "grasp");
  g.thumb = require_string(j, "thumb", "grasp");
  const json& fingers = require(j, "grasp_fingers", "grasp");
  if (!fingers.is_array() || fingers.empty()) {
    throw ParseError("grasp: field 'grasp_fingers' must be a non-empty array");
  }
  for (const json& f : fingers) {
    if (!f.is_string()) {
      throw ParseError("grasp: field 'grasp_fingers' must contain finger names");
    }
    g.grasp_fingers.push_back(f.get<std::string>());
  }
  g.object_pose = Pose::from_xyz_rpy(
      require_vec3(j, "object_pose_xyz", "grasp"),
      require_vec3(j, "object_pose_rpy", "grasp"));
  return g;
}

GraspFile load_grasp_file(const std::string& path) {
  try {
    return parse_grasp(read_file(path),
                       std::filesystem::path(path).parent_path().string());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

namespace {

ConvexShape parse_shape(const json& j, const std::string& context) {
  const std::string type = require_string(j, "type", context);
  const Pose pose = Pose::from_xyz_rpy(optional_vec3(j, "pose_xyz", context),
                                       optional_vec3(j, "pose_rpy", context));
  if (type == "sphere") {
    const double r = require_number(j, "radius", context);
    if (r <= 0.0) throw ParseError(context + ": radius must be positive");
    return ConvexShape::sphere(r, pose.transform(), context);
  }
  if (type == "box") {
    const Eigen::Vector3d he = require_vec3(j, "half_extents", context);
    if ((he.array() <= 0.0).any()) {
      throw ParseError(context + ": half_extents must be positive");
    }
    return ConvexShape::box(he, pose.transform(), context);
  }
  if (type == "hull") {
    const json& vj = require(j, "vertices", context);
    if (!vj.is_array() || vj.size() < 4) {
      throw ParseError(context + ": hull needs at least 4 vertices");
    }
    std::vector<Eigen::Vector3d> verts;
    for (const json& v : vj) {
      if (!v.is_array() || v.size() != 3) {
        throw ParseError(context + ": hull vertices must be arrays of 3 numbers");
      }
      verts.emplace_back(v[0].get<double>(), v[1].get<double>(),
                         v[2].get<double>());
    }
    // Reject flat hulls: greedily build a tetrahedron with nonzero volume.
    const Eigen::Vector3d& v0 = verts[0];
    double best = 0.0;
    Eigen::Vector3d e1 = Eigen::Vector3d::Zero();
    for (const auto& v : verts) {
      if ((v - v0).norm() > best) {
        best = (v - v0).norm();
        e1 = v - v0;
      }
    }
    if (best < 1e-9) throw ParseError(context + ": hull vertices coincide");
    best = 0.0;
    Eigen::Vector3d e2 = Eigen::Vector3d::Zero();
    for (const auto& v : verts) {
      const double a = e1.cross(v - v0).norm();
      if (a > best) {
        best = a;
        e2 = v - v0;
      }
    }
    if (best < 1e-12) throw ParseError(context + ": hull vertices are collinear");
    best = 0.0;
    for (const auto& v : verts) {
      best = std::max(best, std::abs(e1.cross(e2).dot(v - v0)));
    }
    if (best < 1e-15) throw ParseError(context + ": hull vertices are coplanar");
    return ConvexShape::hull(std::move(verts), pose.transform(), context);
  }
  throw ParseError(context + ": unknown shape type '" + type + "'");
}

}  // namespace

CollisionScene parse_scene(const std::string& text) {
  const json j = parse_json(text, "scene");
  CollisionScene scene;
  if (j.contains("object_pieces")) {
    const json& pieces = j["object_pieces"];
    if (!pieces.is_array()) {
      throw ParseError("scene: field 'object_pieces' must be an array");
    }
    for (size_t i = 0; i < pieces.size(); ++i) {
      scene.object_pieces.push_back(
          parse_shape(pieces[i], "object_pieces[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("obstacles")) {
    const json& obs = j["obstacles"];
    if (!obs.is_array()) {
      throw ParseError("scene: field 'obstacles' must be an array");
    }
    for (size_t i = 0; i < obs.size(); ++i) {
      scene.obstacles.push_back(
          parse_shape(obs[i], "obstacles[" + std::to_string(i) + "]"));
    }
  }
  return scene;
}

CollisionScene load_scene_file(const std::string& path) {
  try {
    return parse_scene(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::vector<Pose> load_goals_file(const std::string& path) {
  const json j = parse_json(read_file(path), path);
  const json& goals = require(j, "goals", path);
  if (!goals.is_array() || goals.empty()) {
    throw ParseError(path + ": field 'goals' must be a non-empty array");
  }
  std::vector<Pose> out;
  for (size_t i = 0; i < goals.size(); ++i) {
    const std::string ctx = path + " goal " + std::to_string(i);
    out.push_back(Pose::from_xyz_rpy(require_vec3(goals[i], "xyz", ctx),
                                     require_vec3(goals[i], "rpy", ctx)));
  }
  return out;
}

void save_plan_document(const std::string& path, const PlanDocument& doc) {
  json j;
  j["hand_name"] = doc.hand_name;
  j["mode"] = doc.mode;
  j["max_joint_speed"] = doc.max_joint_speed;
  j["goal"] = pose_to_json(doc.goal);
  j["coarse"] = trajectory_to_json(doc.coarse);
  j["dense"] = trajectory_to_json(doc.dense);
  json path_json = json::array();
  for (const Pose& p : doc.predicted_path) path_json.push_back(pose_to_json(p));
  j["predicted_path"] = std::move(path_json);
  j["converged"] = doc.converged;
  j["iterations"] = doc.iterations;
  j["objective"] = doc.objective;
  j["position_error_m"] = doc.position_error_m;
  j["orientation_error_pct"] = doc.orientation_error_pct;
  j["collision_audit_failed"] = doc.collision_audit_failed;
  if (doc.min_clearance_m) {
    j["min_clearance_m"] = *doc.min_clearance_m;
  } else {
    j["min_clearance_m"] = nullptr;
  }
  if (!doc.config_echo.empty()) {
    json echo = json::object();
    for (const auto& [key, value] : doc.config_echo) echo[key] = value;
    j["config"] = std::move(echo);
  }
  write_file(path, j.dump(2) + "\n");
}

PlanDocument load_plan_document(const std::string& path) {
  const json j = parse_json(read_file(path), path);
  PlanDocument doc;
  doc.hand_name = require_string(j, "hand_name", path);
  doc.mode = require_string(j, "mode", path);
  doc.max_joint_speed = require_number(j, "max_joint_speed", path);
  doc.goal = pose_from_json(require(j, "goal", path), path + " goal");
  doc.coarse = trajectory_from_json(require(j, "coarse", path), path);
  doc.dense = trajectory_from_json(require(j, "dense", path), path);
  const json& pj = require(j, "predicted_path", path);
  if (!pj.is_array() ||
      pj.size() != static_cast<size_t>(doc.dense.steps.rows())) {
    throw ParseError(path +
                     ": predicted_path length must match the dense trajectory");
  }
  for (size_t i = 0; i < pj.size(); ++i) {
    doc.predicted_path.push_back(
        pose_from_json(pj[i], path + " predicted_path"));
  }
  doc.converged = require(j, "converged", path).get<bool>();
  doc.iterations = static_cast<int>(require_number(j, "iterations", path));
  doc.objective = require_number(j, "objective", path);
  doc.position_error_m = require_number(j, "position_error_m", path);
  doc.orientation_error_pct = require_number(j, "orientation_error_pct", path);
  doc.collision_audit_failed =
      require(j, "collision_audit_failed", path).get<bool>();
  if (j.contains("min_clearance_m") && !j["min_clearance_m"].is_null()) {
    doc.min_clearance_m = j["min_clearance_m"].get<double>();
  }
  if (j.contains("config") && j["config"].is_object()) {
    for (const auto& [key, value] : j["config"].items()) {
      doc.config_echo.emplace_back(
          key, value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  return doc;
}

void write_trace_csv(const std::string& path, const ExecutionTrace& trace,
                     double dt) {
  const int rows = static_cast<int>(trace.commanded.rows());
  const int dof = static_cast<int>(trace.commanded.cols());
  std::string out;
  out += "step,time";
  for (int j = 0; j < dof; ++j) out += ",cmd_" + std::to_string(j);
  for (int j = 0; j < dof; ++j) out += ",real_" + std::to_string(j);
  out += ",obj_x,obj_y,obj_z,obj_qw,obj_qx,obj_qy,obj_qz\n";
  for (int t = 0; t < rows; ++t) {
    out += std::to_string(t) + "," + format_double(t * dt);
    for (int j = 0; j < dof; ++j) {
      out += "," + format_double(trace.commanded(t, j));
    }
    for (int j = 0; j < dof; ++j) {
      out += "," + format_double(trace.realized(t, j));
    }
    const Pose& p = trace.object_poses[t];
    out += "," + format_double(p.position.x());
    out += "," + format_double(p.position.y());
    out += "," + format_double(p.position.z());
    out += "," + format_double(p.orientation.w());
    out += "," + format_double(p.orientation.x());
    out += "," + format_double(p.orientation.y());
    out += "," + format_double(p.orientation.z());
    out += "\n";
  }
  write_file(path, out);
}

void write_metrics_json(
    const std::string& path, const Metrics& simulated, const PlanDocument& plan,
    const std::vector<std::pair<std::string, std::string>>& config_echo) {
  json j;
  j["position_error_cm"] = simulated.position_error_cm;
  if (simulated.position_error_pct) {
    j["position_error_pct"] = *simulated.position_error_pct;
  } else {
    j["position_error_pct"] = nullptr;
  }
  j["orientation_error_pct"] = simulated.orientation_error_pct;
  j["plan"] = {{"predicted_position_error_m", plan.position_error_m},
               {"predicted_orientation_error_pct", plan.orientation_error_pct},
               {"converged", plan.converged},
               {"collision_audit_failed", plan.collision_audit_failed}};
  if (!config_echo.empty()) {
    json echo = json::object();
    for (const auto& [key, value] : config_echo) echo[key] = value;
    j["config"] = std::move(echo);
  }
  write_file(path, j.dump(2) + "\n");
}

}  // namespace ingrasp

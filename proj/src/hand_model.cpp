#include "ingrasp/hand_model.hpp"

#include <set>

namespace ingrasp {

int HandModel::dof() const {
  int n = 0;
  for (const auto& f : fingers) n += static_cast<int>(f.joints.size());
  return n;
}

int HandModel::finger_dof(int finger) const {
  return static_cast<int>(fingers.at(finger).joints.size());
}

int HandModel::finger_offset(int finger) const {
  int n = 0;
  for (int i = 0; i < finger; ++i) n += finger_dof(i);
  return n;
}

int HandModel::finger_index(const std::string& finger_name) const {
  for (size_t i = 0; i < fingers.size(); ++i) {
    if (fingers[i].name == finger_name) return static_cast<int>(i);
  }
  throw ParseError("hand model '" + name + "' has no finger named '" +
                   finger_name + "'");
}

Eigen::VectorXd HandModel::lower_limits() const {
  Eigen::VectorXd lo(dof());
  int k = 0;
  for (const auto& f : fingers) {
    for (const auto& j : f.joints) lo[k++] = j.limit_lower;
  }
  return lo;
}

Eigen::VectorXd HandModel::upper_limits() const {
  Eigen::VectorXd hi(dof());
  int k = 0;
  for (const auto& f : fingers) {
    for (const auto& j : f.joints) hi[k++] = j.limit_upper;
  }
  return hi;
}

void HandModel::validate() {
  if (fingers.empty()) {
    throw ParseError("hand model '" + name + "' declares no fingers");
  }
  std::set<std::string> seen;
  for (auto& f : fingers) {
    if (f.name.empty()) {
      throw ParseError("hand model '" + name + "' has a finger with an empty name");
    }
    if (!seen.insert(f.name).second) {
      throw ParseError("hand model '" + name + "' declares finger '" + f.name +
                       "' more than once");
    }
    if (f.joints.empty()) {
      throw ParseError("finger '" + f.name + "' declares no joints");
    }
    for (size_t j = 0; j < f.joints.size(); ++j) {
      auto& joint = f.joints[j];
      const double n = joint.axis.norm();
      if (n < 1e-9) {
        throw ParseError("finger '" + f.name + "' joint " + std::to_string(j) +
                         " has a zero-norm axis");
      }
      joint.axis /= n;
      if (!(joint.limit_lower < joint.limit_upper)) {
        throw ParseError("finger '" + f.name + "' joint " + std::to_string(j) +
                         " has limit_lower >= limit_upper");
      }
    }
  }
}

}  // namespace ingrasp

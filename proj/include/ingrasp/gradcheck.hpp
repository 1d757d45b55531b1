#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ingrasp {

/// Finite-difference audit of every analytic gradient in the objective.
struct GradientAuditConfig {
  std::uint64_t seed = 2024;
  int samples_per_term = 120;
  double tolerance = 1e-5;  // worst allowed relative error
  /// Name of a term whose analytic gradient is deliberately perturbed, to
  /// prove the audit can fail. Empty disables the fault injection.
  std::string corrupt_term;
};

struct GradientAuditReport {
  struct Term {
    std::string name;
    int samples = 0;
    double worst_relative_error = 0.0;
    bool passed = false;
  };
  std::vector<Term> terms;
  bool passed = false;
  double seconds = 0.0;
};

/// Compares each cost term's analytic gradient against central finite
/// differences at randomly sampled configurations of the bundled demo
/// hand, skipping samples that land near a non-smooth point of the term
/// (angle branch cuts, gimbal poses, distance-penalty kinks).
GradientAuditReport run_gradient_audit(const GradientAuditConfig& config = {});

}  // namespace ingrasp

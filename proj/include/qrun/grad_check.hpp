#pragma once

#include <functional>
#include <string>

#include "qrun/autodiff.hpp"

namespace qrun::ad {

// Builds a size-1 loss for the given bound parameters on a fresh tape.
// Must be deterministic: same parameter values, same loss.
using LossBuilder = std::function<Tensor(Tape&, const BoundParams&)>;

struct GradCheckReport {
  bool pass = false;
  double max_rel_err = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  double h = 0.0;
  double tol = 0.0;
};

// Central-difference check of every scalar in every block. Relative error
// uses |a - n| / max(|a|, |n|, 1e-3); the floor keeps round-off noise on
// near-zero gradients from reading as failures.
GradCheckReport grad_check(const LossBuilder& loss, ParamSet& params,
                           double h = 1e-5, double tol = 1e-4);

}  // namespace qrun::ad

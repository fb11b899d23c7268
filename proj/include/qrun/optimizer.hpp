#pragma once

#include <vector>

#include "qrun/autodiff.hpp"

namespace qrun::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment accumulators, one pair per parameter block, in
// ParamSet order.
struct AdamState {
  std::vector<Eigen::ArrayXd> m;
  std::vector<Eigen::ArrayXd> v;
  long step = 0;

  static AdamState init(const ParamSet& params);
};

// One bias-corrected update, in place. grads[i] pairs with params[i].
void adam_step(ParamSet& params, const std::vector<Eigen::ArrayXd>& grads,
               AdamState& state, const AdamConfig& cfg);

// Convenience: pull gradients for bound leaves into ParamSet order.
std::vector<Eigen::ArrayXd> collect(const Gradients& g, const BoundParams& bp);

}  // namespace qrun::ad

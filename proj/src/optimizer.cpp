#include "qrun/optimizer.hpp"

#include <cmath>

namespace qrun::ad {

AdamState AdamState::init(const ParamSet& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m.push_back(Eigen::ArrayXd::Zero(params[i].value.size()));
    s.v.push_back(Eigen::ArrayXd::Zero(params[i].value.size()));
  }
  return s;
}

void adam_step(ParamSet& params, const std::vector<Eigen::ArrayXd>& grads,
               AdamState& state, const AdamConfig& cfg) {
  if (grads.size() != params.size() || state.m.size() != params.size())
    throw ShapeError("adam_step: block count mismatch");
  state.step += 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::ArrayXd& w = params[i].value;
    const Eigen::ArrayXd& g = grads[i];
    if (g.size() != w.size())
      throw ShapeError("adam_step: gradient size mismatch for '" +
                       params[i].name + "'");
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    w -= cfg.lr * (state.m[i] / c1) / ((state.v[i] / c2).sqrt() + cfg.eps);
  }
}

std::vector<Eigen::ArrayXd> collect(const Gradients& g, const BoundParams& bp) {
  std::vector<Eigen::ArrayXd> out;
  out.reserve(bp.leaves.size());
  for (const Tensor& t : bp.leaves) out.push_back(g.at(t));
  return out;
}

}  // namespace qrun::ad

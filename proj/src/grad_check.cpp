#include "qrun/grad_check.hpp"

#include <cmath>

namespace qrun::ad {

namespace {

double eval_loss(const LossBuilder& loss, const ParamSet& params,
                 const std::string& perturbed) {
  Tape tape;
  BoundParams bp = bind(tape, params);
  Tensor l = loss(tape, bp);
  double v = l.scalar();
  if (!std::isfinite(v))
    throw NumericError("grad_check: non-finite loss while perturbing '" +
                       perturbed + "'");
  return v;
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss, ParamSet& params, double h,
                           double tol) {
  if (h <= 0.0) throw ContractError("grad_check: step h must be positive");

  GradCheckReport rep;
  rep.h = h;
  rep.tol = tol;

  // Analytic pass.
  Tape tape;
  BoundParams bp = bind(tape, params);
  Tensor l = loss(tape, bp);
  if (!std::isfinite(l.scalar()))
    throw NumericError("grad_check: non-finite loss at the base point");
  Gradients g = backward(l);

  rep.pass = true;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Eigen::ArrayXd& analytic = g.at(bp.leaves[i]);
    Eigen::ArrayXd& w = params[i].value;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const double keep = w[k];
      w[k] = keep + h;
      const double up = eval_loss(loss, params, params[i].name);
      w[k] = keep - h;
      const double dn = eval_loss(loss, params, params[i].name);
      w[k] = keep;
      const double numeric = (up - dn) / (2.0 * h);
      const double a = analytic[k];
      const double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-3});
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_param = params[i].name;
        rep.worst_index = k;
        rep.worst_analytic = a;
        rep.worst_numeric = numeric;
      }
      if (!(rel < tol)) rep.pass = false;
    }
  }
  return rep;
}

}  // namespace qrun::ad

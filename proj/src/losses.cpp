#include "qrun/losses.hpp"

#include <cmath>

namespace qrun::loss {

using ad::MatRM;
using ad::Tensor;

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  Tensor d = sub(pred, target);
  return mean(mul(d, d));
}

void GridSpec::validate() const {
  if (!(lo < hi)) throw ContractError("grid: lo must be below hi");
  if (points < 2) throw ContractError("grid: need at least 2 points");
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw ContractError("grid: non-finite bounds");
}

Eigen::ArrayXd GridSpec::coords() const {
  validate();
  Eigen::ArrayXd x(points);
  const double h = step();
  for (int i = 0; i < points; ++i) x[i] = lo + i * h;
  x[points - 1] = hi;
  return x;
}

namespace {

Eigen::ArrayXd trapezoid_weights(int points) {
  Eigen::ArrayXd w = Eigen::ArrayXd::Ones(points);
  w[0] = w[points - 1] = 0.5;
  return w;
}

// Grid integral of exp(f_grid) as a scalar tensor.
Tensor integral_of_exp(ad::Tape& tape, const Tensor& f_grid,
                       const GridSpec& grid) {
  Tensor w = tape.leaf({grid.points, 1}, trapezoid_weights(grid.points), false,
                       "quadrature_weights");
  return scale(sum(mul(exp(f_grid), w)), grid.step());
}

}  // namespace

Tensor nll_normalized(ad::Tape& tape, const model::Model& m,
                      const ad::BoundParams& bp, const MatRM& samples,
                      const GridSpec& grid) {
  grid.validate();
  if (m.d_in() != 1 || m.d_out() != 1)
    throw ShapeError("nll_normalized: density model must map 1 -> 1");
  if (samples.cols() != 1 || samples.rows() < 1)
    throw ShapeError("nll_normalized: samples must be [N, 1]");
  for (Eigen::Index i = 0; i < samples.rows(); ++i)
    if (!(samples(i, 0) >= grid.lo && samples(i, 0) <= grid.hi))
      throw ContractError("nll_normalized: sample " + std::to_string(samples(i, 0)) +
                          " outside the normalization grid");

  Eigen::ArrayXd gx = grid.coords();
  Tensor gx_leaf = tape.leaf(
      {grid.points, 1},
      Eigen::Map<const MatRM>(gx.data(), grid.points, 1), false, "grid_x");
  Tensor f_grid = m.forward(tape, bp, gx_leaf);
  Tensor f_samples =
      m.forward(tape, bp, tape.leaf({static_cast<int>(samples.rows()), 1},
                                    samples, false, "samples"));
  return sub(log(integral_of_exp(tape, f_grid, grid)), mean(f_samples));
}

Eigen::ArrayXd qhat_on_grid(const model::Model& m, const ad::ParamSet& params,
                            const GridSpec& grid) {
  grid.validate();
  if (m.d_in() != 1 || m.d_out() != 1)
    throw ShapeError("qhat_on_grid: density model must map 1 -> 1");
  ad::Tape tape;
  ad::BoundParams bp = bind(tape, params);
  Eigen::ArrayXd gx = grid.coords();
  Tensor f = m.forward(
      tape, bp,
      tape.leaf({grid.points, 1},
                Eigen::Map<const MatRM>(gx.data(), grid.points, 1), false));
  Eigen::ArrayXd q = f.value().exp();
  return q / integrate_on_grid(q, grid);
}

Eigen::ArrayXd pdf_on_grid(const data::MixtureDistribution& dist,
                           const GridSpec& grid) {
  Eigen::ArrayXd gx = grid.coords();
  Eigen::ArrayXd p(grid.points);
  for (int i = 0; i < grid.points; ++i) p[i] = mixture_pdf(dist, gx[i]);
  return p;
}

double integrate_on_grid(const Eigen::ArrayXd& values, const GridSpec& grid) {
  grid.validate();
  if (values.size() != grid.points)
    throw ShapeError("integrate_on_grid: value count != grid points");
  return (values * trapezoid_weights(grid.points)).sum() * grid.step();
}

double kl_divergence(const Eigen::ArrayXd& p, const Eigen::ArrayXd& q,
                     const GridSpec& grid, int* clip_count) {
  grid.validate();
  if (p.size() != grid.points || q.size() != grid.points)
    throw ShapeError("kl_divergence: density size != grid points");
  for (double v : {integrate_on_grid(p, grid), integrate_on_grid(q, grid)})
    if (std::abs(v - 1.0) > 1e-4)
      throw ContractError("kl_divergence: density integrates to " +
                          std::to_string(v) + ", expected 1");

  if (clip_count) *clip_count = 0;
  Eigen::ArrayXd integrand = Eigen::ArrayXd::Zero(grid.points);
  for (int i = 0; i < grid.points; ++i) {
    if (p[i] < 1e-12) continue;  // lim_{p->0} p log p = 0
    double qi = q[i];
    if (qi < 1e-300) {
      qi = 1e-300;
      if (clip_count) ++*clip_count;
    }
    integrand[i] = p[i] * std::log(p[i] / qi);
  }
  return integrate_on_grid(integrand, grid);
}

}  // namespace qrun::loss

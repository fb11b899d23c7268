#pragma once

#include "qrun/autodiff.hpp"
#include "qrun/datasets.hpp"
#include "qrun/models.hpp"

namespace qrun::loss {

// mean squared difference over every entry.
ad::Tensor mse_loss(const ad::Tensor& pred, const ad::Tensor& target);

// Uniform quadrature grid for density normalization.
struct GridSpec {
  double lo = -12.0;
  double hi = 12.0;
  int points = 4096;

  void validate() const;
  double step() const { return (hi - lo) / (points - 1); }
  Eigen::ArrayXd coords() const;
};

// Negative log-likelihood of a density q = exp(f) normalized by its
// trapezoid integral on the grid: loss = log I - mean f(samples). The
// integral stays on the tape, so gradients flow through the quadrature.
// samples must lie inside [grid.lo, grid.hi].
ad::Tensor nll_normalized(ad::Tape& tape, const model::Model& m,
                          const ad::BoundParams& bp,
                          const ad::MatRM& samples, const GridSpec& grid);

// exp(model)/I evaluated with frozen parameters; integrates to 1 on the grid
// by construction.
Eigen::ArrayXd qhat_on_grid(const model::Model& m, const ad::ParamSet& params,
                            const GridSpec& grid);

// True density sampled on the grid.
Eigen::ArrayXd pdf_on_grid(const data::MixtureDistribution& dist,
                           const GridSpec& grid);

// Trapezoid integral of values sampled on the grid.
double integrate_on_grid(const Eigen::ArrayXd& values, const GridSpec& grid);

// Trapezoid estimate of the relative entropy between two densities given on
// the grid. Terms with p < 1e-12 contribute zero; q below 1e-300 under
// remaining mass is clipped (counted in clip_count when provided). Both
// inputs must integrate to 1 within 1e-4.
double kl_divergence(const Eigen::ArrayXd& p, const Eigen::ArrayXd& q,
                     const GridSpec& grid, int* clip_count = nullptr);

}  // namespace qrun::loss

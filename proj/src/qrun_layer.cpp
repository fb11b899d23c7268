#include "qrun/qrun_layer.hpp"

#include <algorithm>
#include <cmath>

namespace qrun {

using ad::Tensor;

void QrunConfig::validate() const {
  if (d_in < 1 || d_out < 1 || alpha < 1 || n < 1 || m < 1)
    throw ContractError("qrun config: extents must be positive");
  if (d_out % alpha != 0)
    throw ContractError("qrun config: d_out must be divisible by alpha");
  if (!(w_max > 0.5))
    throw ContractError("qrun config: w_max must exceed 0.5");
}

long param_count_table1(const QrunConfig& cfg) {
  cfg.validate();
  const long p = cfg.positions();
  return static_cast<long>(cfg.d_in) * p + cfg.n * (1 + 2L * cfg.m) +
         static_cast<long>(cfg.m) * cfg.m + static_cast<long>(cfg.m) * cfg.alpha;
}

long param_count(const QrunConfig& cfg) {
  long c = param_count_table1(cfg) + cfg.positions();  // + b0
  if (cfg.use_bias_observable) c += 2L * cfg.m + cfg.alpha;
  return c;
}

QrunLayer::QrunLayer(QrunConfig cfg, std::string prefix)
    : cfg_(cfg), prefix_(std::move(prefix)) {
  cfg_.validate();
}

namespace {

Eigen::ArrayXd uniform_block(SplitMix64& rng, Eigen::Index count, double lo,
                             double hi) {
  Eigen::ArrayXd a(count);
  for (Eigen::Index i = 0; i < count; ++i) a[i] = rng.uniform(lo, hi);
  return a;
}

Eigen::ArrayXd fan_in_block(SplitMix64& rng, int rows, int cols) {
  const double bound = std::sqrt(1.0 / cols);
  return uniform_block(rng, static_cast<Eigen::Index>(rows) * cols, -bound,
                       bound);
}

}  // namespace

void QrunLayer::init(ad::ParamSet& params, SplitMix64& rng) const {
  const int p = cfg_.positions();
  params.add(prefix_ + ".W0", {p, cfg_.d_in}, fan_in_block(rng, p, cfg_.d_in));
  params.add(prefix_ + ".b0", {p}, Eigen::ArrayXd::Zero(p));

  // Re-upload weights: positive, sorted, nudged apart so no two uploads
  // collapse onto the same frequency.
  Eigen::ArrayXd w = uniform_block(rng, cfg_.n, 0.5, cfg_.w_max);
  std::sort(w.data(), w.data() + w.size());
  for (Eigen::Index i = 1; i < w.size(); ++i)
    if (w[i] - w[i - 1] <= 1e-6) w[i] = w[i - 1] + 2e-6;
  params.add(prefix_ + ".w", {cfg_.n}, std::move(w));

  params.add(prefix_ + ".W1", {cfg_.m, 2 * cfg_.n},
             fan_in_block(rng, cfg_.m, 2 * cfg_.n));
  params.add(prefix_ + ".W2", {cfg_.m, cfg_.m},
             fan_in_block(rng, cfg_.m, cfg_.m));
  params.add(prefix_ + ".W3", {cfg_.alpha, cfg_.m},
             fan_in_block(rng, cfg_.alpha, cfg_.m));
  if (cfg_.use_bias_observable) {
    params.add(prefix_ + ".b1", {cfg_.m}, Eigen::ArrayXd::Zero(cfg_.m));
    params.add(prefix_ + ".b2", {cfg_.m}, Eigen::ArrayXd::Zero(cfg_.m));
    params.add(prefix_ + ".b3", {cfg_.alpha}, Eigen::ArrayXd::Zero(cfg_.alpha));
  }
}

namespace detail {

Tensor reupload_encode(ad::Tape&, const Tensor& x_prime, const Tensor& w) {
  if (x_prime.dims().size() != 2 || w.dims().size() != 1)
    throw ShapeError("reupload_encode: expects [B,p] input and [n] weights");
  const int rows = static_cast<int>(x_prime.size());
  const int n = w.dims()[0];
  // Row-major [B,p] flattens to one scalar per (batch, position) row.
  Tensor flat = reshape(x_prime, {rows, 1});
  Tensor theta = matmul(flat, reshape(w, {1, n}));
  return sincos_interleave(theta);
}

Tensor observable_apply(ad::Tape&, const Tensor& h, const Tensor& w1,
                        const Tensor* b1, const Tensor& w2, const Tensor* b2,
                        const Tensor& w3, const Tensor* b3, Act activation) {
  auto act = [&](const Tensor& t) {
    return activation == Act::tanh ? tanh(t) : relu(t);
  };
  auto lin = [&](const Tensor& in, const Tensor& w_block, const Tensor* bias) {
    Tensor out = matmul(in, transpose(w_block));
    return bias != nullptr ? add_bias(out, *bias) : out;
  };
  Tensor z1 = act(lin(h, w1, b1));
  Tensor z2 = act(lin(z1, w2, b2));
  return lin(z2, w3, b3);
}

}  // namespace detail

Tensor QrunLayer::forward(ad::Tape& tape, const ad::BoundParams& bp,
                          const Tensor& x) const {
  if (x.dims().size() != 2 || x.dims()[1] != cfg_.d_in)
    throw ShapeError("qrun forward: input must be [B," +
                     std::to_string(cfg_.d_in) + "]");
  const int batch = x.dims()[0];
  const int p = cfg_.positions();

  const Tensor& w0 = bp.at(prefix_ + ".W0");
  Tensor x_prime = add_bias(matmul(x, transpose(w0)), bp.at(prefix_ + ".b0"));
  Tensor h = detail::reupload_encode(tape, x_prime, bp.at(prefix_ + ".w"));

  const Tensor* b1 = nullptr;
  const Tensor* b2 = nullptr;
  const Tensor* b3 = nullptr;
  if (cfg_.use_bias_observable) {
    b1 = &bp.at(prefix_ + ".b1");
    b2 = &bp.at(prefix_ + ".b2");
    b3 = &bp.at(prefix_ + ".b3");
  }
  Tensor obs = detail::observable_apply(
      tape, h, bp.at(prefix_ + ".W1"), b1, bp.at(prefix_ + ".W2"), b2,
      bp.at(prefix_ + ".W3"), b3, cfg_.activation);

  // Rows of obs are (batch-major, position-minor) alpha-blocks, so the flat
  // buffer already reads as [B, p*alpha].
  return reshape(obs, {batch, p * cfg_.alpha});
}

}  // namespace qrun

#include "qrun/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qrun/errors.hpp"
#include "qrun/rng.hpp"

namespace qrun::learn {
namespace {

// Shuffle stream is offset from the init stream so minibatching never
// perturbs initialization.
constexpr std::uint64_t kShuffleOffset = 1000003;

void fisher_yates(std::vector<int>& order, SplitMix64& rng) {
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_index(i + 1)]);
}

ad::MatRM take_rows(const ad::MatRM& src, const std::vector<int>& order,
                    int start, int len) {
  ad::MatRM out(len, src.cols());
  for (int r = 0; r < len; ++r)
    out.row(r) = src.row(order[static_cast<std::size_t>(start + r)]);
  return out;
}

// One forward/backward/update. Returns the loss value; on a non-finite loss
// the update is skipped and the caller aborts with epoch context.
double run_step(const model::Model& m, ad::ParamSet& ps, ad::AdamState& state,
                const TrainConfig& cfg, const ad::MatRM& x,
                const ad::MatRM& y) {
  ad::Tape tape;
  ad::BoundParams bp = ad::bind(tape, ps);
  ad::Tensor l = cfg.loss == LossKind::mse
                     ? loss::mse_loss(m.forward(tape, bp, tape.constant(x)),
                                      tape.constant(y))
                     : loss::nll_normalized(tape, m, bp, x, cfg.grid);
  const double value = l.scalar();
  if (!std::isfinite(value)) return value;
  ad::Gradients g = ad::backward(l);
  ad::adam_step(ps, ad::collect(g, bp), state, cfg.adam);
  return value;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ContractError("train config: epochs must be >= 1");
  if (batch < 0) throw ContractError("train config: batch must be >= 0");
  if (!(adam.lr > 0.0)) throw ContractError("train config: lr must be positive");
  if (loss == LossKind::nll_normalized) grid.validate();
}

TrainResult train(const model::Model& m, const data::Dataset& ds,
                  const TrainConfig& cfg) {
  cfg.validate();
  ds.validate();
  if (ds.train_idx.empty()) throw ContractError("train: empty train split");
  if (ds.d_in() != m.d_in())
    throw ShapeError("train: dataset d_in " + std::to_string(ds.d_in()) +
                     " vs model d_in " + std::to_string(m.d_in()));
  if (cfg.loss == LossKind::mse) {
    if (ds.d_target() != m.d_out())
      throw ShapeError("train: target width " + std::to_string(ds.d_target()) +
                       " vs model d_out " + std::to_string(m.d_out()));
  } else if (ds.d_target() != 0) {
    throw ContractError("train: nll loss takes sample-only datasets");
  }

  const auto t0 = std::chrono::steady_clock::now();

  TrainResult out;
  SplitMix64 init_rng(cfg.seed);
  m.init(out.params, init_rng);
  ad::AdamState state = ad::AdamState::init(out.params);
  SplitMix64 shuffle_rng(cfg.seed + kShuffleOffset);

  const ad::MatRM x_all = ds.gather_inputs(ds.train_idx);
  const ad::MatRM y_all = cfg.loss == LossKind::mse
                              ? ds.gather_targets(ds.train_idx)
                              : ad::MatRM(x_all.rows(), 0);
  const int n = static_cast<int>(x_all.rows());
  const int bsz = cfg.batch == 0 ? n : std::min(cfg.batch, n);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  out.metrics.train_loss.reserve(static_cast<std::size_t>(cfg.epochs));
  double last_finite = std::numeric_limits<double>::quiet_NaN();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double weighted = 0.0;
    if (bsz == n) {
      const double value = run_step(m, out.params, state, cfg, x_all, y_all);
      if (!std::isfinite(value))
        throw DivergenceError(
            "train: non-finite loss at epoch " + std::to_string(epoch), epoch,
            last_finite);
      last_finite = value;
      weighted = value * n;
    } else {
      fisher_yates(order, shuffle_rng);
      for (int start = 0; start < n; start += bsz) {
        const int len = std::min(bsz, n - start);
        const ad::MatRM xb = take_rows(x_all, order, start, len);
        const ad::MatRM yb = cfg.loss == LossKind::mse
                                 ? take_rows(y_all, order, start, len)
                                 : ad::MatRM(len, 0);
        const double value = run_step(m, out.params, state, cfg, xb, yb);
        if (!std::isfinite(value))
          throw DivergenceError(
              "train: non-finite loss at epoch " + std::to_string(epoch),
              epoch, last_finite);
        last_finite = value;
        weighted += value * len;
      }
    }
    out.metrics.train_loss.push_back(weighted / n);
  }

  out.metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

double evaluate(const model::Model& m, const ad::ParamSet& params,
                const data::Dataset& ds, Metric metric, Split split,
                const loss::GridSpec* grid) {
  const bool on_train = split == Split::train;
  const std::vector<int>& idx = on_train ? ds.train_idx : ds.test_idx;
  if (idx.empty())
    throw ContractError(std::string("evaluate: empty ") +
                        (on_train ? "train" : "test") + " split");

  if (metric == Metric::kl) {
    const data::Provenance& prov = ds.provenance;
    if (prov.generator != "mixture")
      throw ContractError("evaluate: kl metric needs a mixture-generated dataset");
    auto param = [&](const char* key) {
      auto it = prov.params.find(key);
      if (it == prov.params.end())
        throw ContractError(std::string("evaluate: provenance missing ") + key);
      return it->second;
    };
    data::MixtureDistribution dist = data::make_mixture(
        prov.seed, static_cast<int>(param("k")), param("mu_lo"),
        param("mu_hi"), param("sigma_lo"), param("sigma_hi"));
    const loss::GridSpec g = grid ? *grid : loss::GridSpec{};
    return loss::kl_divergence(loss::pdf_on_grid(dist, g),
                               loss::qhat_on_grid(m, params, g), g);
  }

  if (ds.d_target() != m.d_out())
    throw ShapeError("evaluate: target width " + std::to_string(ds.d_target()) +
                     " vs model d_out " + std::to_string(m.d_out()));
  const ad::MatRM x = ds.gather_inputs(idx);
  const ad::MatRM y = ds.gather_targets(idx);

  ad::Tape tape;
  ad::BoundParams bp = ad::bind(tape, params);
  const Eigen::ArrayXd pred = m.forward(tape, bp, tape.constant(x)).value();
  const Eigen::ArrayXd target =
      Eigen::Map<const Eigen::ArrayXd>(y.data(), y.size());
  const Eigen::ArrayXd diff = pred - target;
  return metric == Metric::mse ? diff.square().mean() : diff.abs().mean();
}

}  // namespace qrun::learn

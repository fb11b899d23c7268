#pragma once

#include <vector>

#include "qrun/datasets.hpp"
#include "qrun/losses.hpp"
#include "qrun/models.hpp"
#include "qrun/optimizer.hpp"

namespace qrun::learn {

enum class LossKind { mse, nll_normalized };
enum class Metric { mse, mae, kl };
enum class Split { train, test };

struct TrainConfig {
  int epochs = 1;
  ad::AdamConfig adam;
  LossKind loss = LossKind::mse;
  int batch = 0;  // 0 = full batch
  std::uint64_t seed = 0;
  loss::GridSpec grid;  // nll normalization only

  void validate() const;
};

struct Metrics {
  // One entry per epoch; under minibatching, the size-weighted mean of the
  // batch losses seen that epoch.
  std::vector<double> train_loss;
  double wall_seconds = 0.0;
};

struct TrainResult {
  ad::ParamSet params;
  Metrics metrics;
};

// Seeds the init stream from cfg.seed and the shuffle stream from a fixed
// offset of it, runs Adam for cfg.epochs, and aborts with DivergenceError on
// the first non-finite loss.
TrainResult train(const model::Model& m, const data::Dataset& ds,
                  const TrainConfig& cfg);

// Mean metric over the chosen split. kl compares qhat against the mixture
// recorded in the dataset's provenance (grid defaults to GridSpec{}).
double evaluate(const model::Model& m, const ad::ParamSet& params,
                const data::Dataset& ds, Metric metric, Split split,
                const loss::GridSpec* grid = nullptr);

}  // namespace qrun::learn

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrun/autodiff.hpp"
#include "qrun/qrun_layer.hpp"
#include "qrun/rng.hpp"

namespace qrun::model {

// A model is a stateless architecture descriptor: init() registers the
// trainable blocks, forward() replays the computation on a tape. Frozen
// internals (e.g. a random projection) live in the model object itself and
// are rebuilt from the config, never trained.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string kind() const = 0;
  virtual int d_in() const = 0;
  virtual int d_out() const = 0;

  // Registers every trainable block in a stable order.
  virtual void init(ad::ParamSet& params, SplitMix64& rng) const = 0;

  // x: [B, d_in] -> [B, d_out]
  virtual ad::Tensor forward(ad::Tape& tape, const ad::BoundParams& bp,
                             const ad::Tensor& x) const = 0;

  // Trainable scalar count; equals what init() registers.
  virtual long param_count() const = 0;

  // Round-trippable config (same document make_model accepts).
  virtual nlohmann::json config_json() const = 0;
};

// --- plain / sinusoidal MLP -------------------------------------------------

struct MlpConfig {
  int d_in = 1;
  int d_out = 1;
  std::vector<int> hidden;  // at least one layer
  Act activation = Act::tanh;
  bool sinusoidal = false;  // sin(omega0 * (Wx+b)) in place of activation
  double omega0 = 30.0;
  void validate() const;
};

class MlpModel : public Model {
 public:
  explicit MlpModel(MlpConfig cfg);

  std::string kind() const override { return cfg_.sinusoidal ? "siren" : "mlp"; }
  int d_in() const override { return cfg_.d_in; }
  int d_out() const override { return cfg_.d_out; }
  void init(ad::ParamSet& params, SplitMix64& rng) const override;
  ad::Tensor forward(ad::Tape& tape, const ad::BoundParams& bp,
                     const ad::Tensor& x) const override;
  long param_count() const override;
  nlohmann::json config_json() const override;

  const MlpConfig& config() const { return cfg_; }

 private:
  MlpConfig cfg_;
};

// --- random-Fourier-feature front end + MLP head ------------------------------

struct RffConfig {
  int d_in = 1;
  int d_out = 1;
  int features = 16;       // rows of the frozen projection
  double bandwidth = 1.0;  // stddev of the projection entries
  std::vector<int> hidden;
  Act activation = Act::relu;
  std::uint64_t seed = 0;  // projection draw only
  void validate() const;
};

// [cos(2pi B x) | sin(2pi B x)] for a frozen projection B: [F, d_in];
// x: [N, d_in] -> [N, 2F].
ad::Tensor rff_features(ad::Tape& tape, const ad::Tensor& x,
                        const ad::MatRM& projection);

class RffModel : public Model {
 public:
  explicit RffModel(RffConfig cfg);

  std::string kind() const override { return "rff"; }
  int d_in() const override { return cfg_.d_in; }
  int d_out() const override { return cfg_.d_out; }
  void init(ad::ParamSet& params, SplitMix64& rng) const override;
  ad::Tensor forward(ad::Tape& tape, const ad::BoundParams& bp,
                     const ad::Tensor& x) const override;
  long param_count() const override;
  nlohmann::json config_json() const override;

  const RffConfig& config() const { return cfg_; }
  const ad::MatRM& projection() const { return b_; }

 private:
  RffConfig cfg_;
  ad::MatRM b_;  // [features, d_in], frozen
};

// --- Fourier-channel layers ---------------------------------------------------

struct FanConfig {
  int d_in = 1;
  int d_out = 1;
  std::vector<int> hidden;  // per-layer output widths
  double p_ratio = 0.25;    // fraction of each width spent on cos channels
  Act activation = Act::relu;
  void validate() const;
  // cos (= sin) channel count for a given layer width.
  int fourier_width(int width) const;
};

class FanModel : public Model {
 public:
  explicit FanModel(FanConfig cfg);

  std::string kind() const override { return "fan"; }
  int d_in() const override { return cfg_.d_in; }
  int d_out() const override { return cfg_.d_out; }
  void init(ad::ParamSet& params, SplitMix64& rng) const override;
  ad::Tensor forward(ad::Tape& tape, const ad::BoundParams& bp,
                     const ad::Tensor& x) const override;
  long param_count() const override;
  nlohmann::json config_json() const override;

  const FanConfig& config() const { return cfg_; }

 private:
  FanConfig cfg_;
};

// --- re-uploading stack ---------------------------------------------------------

struct QrunModelConfig {
  int d_in = 1;
  int d_out = 1;
  std::vector<int> widths;  // output width of each re-uploading layer
  int alpha = 2;
  int n = 4;
  int m = 8;
  Act activation = Act::tanh;
  bool use_bias_observable = true;
  double w_max = 30.0;
  void validate() const;
  QrunConfig layer(std::size_t i) const;
};

class QrunModel : public Model {
 public:
  explicit QrunModel(QrunModelConfig cfg);

  std::string kind() const override { return "qrun"; }
  int d_in() const override { return cfg_.d_in; }
  int d_out() const override { return cfg_.d_out; }
  void init(ad::ParamSet& params, SplitMix64& rng) const override;
  ad::Tensor forward(ad::Tape& tape, const ad::BoundParams& bp,
                     const ad::Tensor& x) const override;
  long param_count() const override;
  nlohmann::json config_json() const override;

  const QrunModelConfig& config() const { return cfg_; }

 private:
  QrunModelConfig cfg_;
  std::vector<QrunLayer> layers_;
};

// --- construction ---------------------------------------------------------------

// Builds a model from a JSON document with a "kind" discriminator. Unknown
// keys are rejected; errors carry JSON-pointer paths rooted at path_prefix.
std::unique_ptr<Model> make_model(const nlohmann::json& cfg,
                                  const std::string& path_prefix = "/model");

// Smallest |count(width) - target| over widths in [lo, hi]; the winner must
// land within 5% of target or this throws ContractError naming the best
// miss. count_for must be nondecreasing in width.
int fit_width_to_budget(const std::function<long(int)>& count_for, long target,
                        int lo = 1, int hi = 4096);

}  // namespace qrun::model

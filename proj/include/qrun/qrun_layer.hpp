#pragma once

#include <string>

#include "qrun/autodiff.hpp"
#include "qrun/rng.hpp"

namespace qrun {

enum class Act { tanh, relu };

struct QrunConfig {
  int d_in = 1;
  int d_out = 1;
  int alpha = 1;  // outputs per position
  int n = 1;      // re-upload count
  int m = 1;      // observable hidden width
  Act activation = Act::tanh;
  bool use_bias_observable = true;
  double w_max = 30.0;  // upper end of the re-upload weight init range
  std::uint64_t seed = 0;

  int positions() const { return d_out / alpha; }
  void validate() const;
};

// d_in*d_out/alpha + n(1+2m) + m^2 + m*alpha  — linear map, re-upload
// weights + observable MLP weights, no biases.
long param_count_table1(const QrunConfig& cfg);
// Trainable scalars actually allocated: adds p for b0 and, when the
// observable MLP carries biases, 2m + alpha.
long param_count(const QrunConfig& cfg);

// One re-uploading layer: x -> W0 x + b0 -> per-element cos/sin features ->
// shared observable MLP -> concatenated alpha-blocks.
class QrunLayer {
 public:
  QrunLayer(QrunConfig cfg, std::string prefix);

  const QrunConfig& config() const { return cfg_; }
  const std::string& prefix() const { return prefix_; }

  // Registers this layer's blocks (prefix.W0, prefix.b0, prefix.w, ...)
  // in declaration order.
  void init(ad::ParamSet& params, SplitMix64& rng) const;

  // x: [B, d_in] -> [B, d_out]
  ad::Tensor forward(ad::Tape& tape, const ad::BoundParams& bp,
                     const ad::Tensor& x) const;

 private:
  QrunConfig cfg_;
  std::string prefix_;
};

namespace detail {

// x_prime: [B, p], w: [n] -> [B*p, 2n]; row j*B... row index r = b*p + j
// holds [cos(w_1 x'_bj), sin(w_1 x'_bj), ..., cos(w_n x'_bj), sin(w_n x'_bj)].
ad::Tensor reupload_encode(ad::Tape& tape, const ad::Tensor& x_prime,
                           const ad::Tensor& w);

// h: [R, 2n] -> [R, alpha], f3(sigma(f2(sigma(f1(h))))) with weights shared
// across rows. Bias tensors may be null (id < 0) when the config omits them.
ad::Tensor observable_apply(ad::Tape& tape, const ad::Tensor& h,
                            const ad::Tensor& w1, const ad::Tensor* b1,
                            const ad::Tensor& w2, const ad::Tensor* b2,
                            const ad::Tensor& w3, const ad::Tensor* b3,
                            Act activation);

}  // namespace detail

}  // namespace qrun

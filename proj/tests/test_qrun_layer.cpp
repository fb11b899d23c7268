#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qrun/grad_check.hpp"
#include "qrun/qrun_layer.hpp"

using namespace qrun;
using namespace qrun::ad;

namespace {

QrunConfig small_cfg() {
  QrunConfig cfg;
  cfg.d_in = 4;
  cfg.d_out = 4;
  cfg.alpha = 2;
  cfg.n = 3;
  cfg.m = 5;
  return cfg;
}

Eigen::ArrayXd randu(SplitMix64& rng, Eigen::Index n, double lo = -1.0,
                     double hi = 1.0) {
  Eigen::ArrayXd a(n);
  for (Eigen::Index i = 0; i < n; ++i) a[i] = rng.uniform(lo, hi);
  return a;
}

}  // namespace

TEST_CASE("init produces the contracted shapes") {
  QrunLayer layer(small_cfg(), "q");
  ParamSet ps;
  SplitMix64 rng(1);
  layer.init(ps, rng);
  CHECK(ps.at("q.W0").dims == std::vector<int>{2, 4});
  CHECK(ps.at("q.w").dims == std::vector<int>{3});
  CHECK(ps.at("q.W1").dims == std::vector<int>{5, 6});
  CHECK(ps.at("q.W3").dims == std::vector<int>{2, 5});
  CHECK(ps.at("q.b0").value.abs().maxCoeff() == 0.0);
}

TEST_CASE("same seed gives bit-identical parameters") {
  QrunLayer layer(small_cfg(), "q");
  ParamSet a, b;
  SplitMix64 ra(77), rb(77);
  layer.init(a, ra);
  layer.init(b, rb);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (Eigen::Index k = 0; k < a[i].value.size(); ++k)
      CHECK(a[i].value[k] == b[i].value[k]);
}

TEST_CASE("re-upload weights are sorted with gaps above 1e-6") {
  QrunConfig cfg = small_cfg();
  cfg.n = 24;
  cfg.w_max = 0.5000001;  // squeeze draws into a tiny interval to force jitter
  QrunLayer layer(cfg, "q");
  ParamSet ps;
  SplitMix64 rng(3);
  layer.init(ps, rng);
  const Eigen::ArrayXd& w = ps.at("q.w").value;
  for (Eigen::Index i = 1; i < w.size(); ++i) CHECK(w[i] - w[i - 1] > 1e-6);

  QrunLayer wide(small_cfg(), "r");
  ParamSet ps2;
  SplitMix64 rng2(4);
  wide.init(ps2, rng2);
  const Eigen::ArrayXd& w2 = ps2.at("r.w").value;
  for (Eigen::Index i = 0; i < w2.size(); ++i) {
    CHECK(w2[i] >= 0.5);
    CHECK(w2[i] <= 30.0);
  }
}

TEST_CASE("reupload_encode block structure") {
  Tape t;
  // x' = 0 gives the [1, 0, 1, 0, ...] pattern.
  Tensor x0 = t.leaf({1, 2}, Eigen::ArrayXd::Zero(2), false);
  Eigen::ArrayXd wv(2);
  wv << 1.0, 2.0;
  Tensor w = t.leaf({2}, wv, false);
  Tensor h0 = detail::reupload_encode(t, x0, w);
  CHECK(h0.dims() == std::vector<int>{2, 4});
  for (Eigen::Index k = 0; k < h0.size(); ++k)
    CHECK(h0.value()[k] == (k % 2 == 0 ? 1.0 : 0.0));

  // w = [pi/2], x' = 1 -> [cos(pi/2), sin(pi/2)] = [0, 1].
  Tensor x1 = t.leaf({1, 1}, Eigen::ArrayXd::Ones(1), false);
  Eigen::ArrayXd wpi(1);
  wpi << M_PI / 2.0;
  Tensor h1 = detail::reupload_encode(t, x1, t.leaf({1}, wpi, false));
  CHECK(std::abs(h1.value()[0]) < 1e-15);
  CHECK(h1.value()[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("encoding is bounded with unit-norm cos/sin pairs") {
  Tape t;
  SplitMix64 rng(9);
  Tensor x = t.leaf({3, 4}, randu(rng, 12, -50.0, 50.0), false);
  Tensor w = t.leaf({5}, randu(rng, 5, 0.5, 30.0), false);
  Tensor h = detail::reupload_encode(t, x, w);
  CHECK(h.value().abs().maxCoeff() <= 1.0);
  for (Eigen::Index r = 0; r < 12; ++r)
    for (Eigen::Index i = 0; i < 5; ++i) {
      const double c = h.value()[r * 10 + 2 * i];
      const double s = h.value()[r * 10 + 2 * i + 1];
      CHECK(c * c + s * s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("encoding is periodic per upload with period 2*pi/w_i") {
  Tape t;
  Eigen::ArrayXd wv(2);
  wv << 1.5, 4.0;
  Tensor w = t.leaf({2}, wv, false);
  Eigen::ArrayXd xv(1);
  xv << 0.8;
  Tensor h = detail::reupload_encode(t, t.leaf({1, 1}, xv, false), w);
  Eigen::ArrayXd shifted(1);
  shifted << 0.8 + 2.0 * M_PI / 1.5;
  Tensor hs = detail::reupload_encode(t, t.leaf({1, 1}, shifted, false), w);
  // Block 0 (w = 1.5) unchanged; block 1 generally moves.
  CHECK(std::abs(hs.value()[0] - h.value()[0]) < 1e-12);
  CHECK(std::abs(hs.value()[1] - h.value()[1]) < 1e-12);
  CHECK(std::abs(hs.value()[2] - h.value()[2]) > 1e-3);
}

TEST_CASE("observable_apply: zero parameters give zero output") {
  Tape t;
  const int n = 3, m = 5, alpha = 2;
  SplitMix64 rng(10);
  Tensor h = t.leaf({4, 2 * n}, randu(rng, 8 * n), false);
  Tensor w1 = t.leaf({m, 2 * n}, Eigen::ArrayXd::Zero(m * 2 * n), false);
  Tensor w2 = t.leaf({m, m}, Eigen::ArrayXd::Zero(m * m), false);
  Tensor w3 = t.leaf({alpha, m}, Eigen::ArrayXd::Zero(alpha * m), false);
  Tensor b1 = t.leaf({m}, Eigen::ArrayXd::Zero(m), false);
  Tensor b2 = t.leaf({m}, Eigen::ArrayXd::Zero(m), false);
  Tensor b3 = t.leaf({alpha}, Eigen::ArrayXd::Zero(alpha), false);
  Tensor out = detail::observable_apply(t, h, w1, &b1, w2, &b2, w3, &b3,
                                        Act::tanh);
  CHECK(out.dims() == std::vector<int>{4, alpha});
  CHECK(out.value().abs().maxCoeff() == 0.0);
}

TEST_CASE("forward output shape and weight sharing across positions") {
  QrunConfig cfg = small_cfg();
  QrunLayer layer(cfg, "q");
  ParamSet ps;
  SplitMix64 rng(21);
  layer.init(ps, rng);

  SplitMix64 xr(22);
  Eigen::ArrayXd xv = randu(xr, 2 * cfg.d_in);

  Tape t;
  BoundParams bp = bind(t, ps);
  Tensor out = layer.forward(t, bp, t.leaf({2, cfg.d_in}, xv, false));
  CHECK(out.dims() == std::vector<int>{2, cfg.d_out});

  // Swapping the two rows of W0 (and b0) must swap the two alpha-blocks of
  // the output exactly: the observable module is shared verbatim.
  ParamSet swapped;
  SplitMix64 rng2(21);
  layer.init(swapped, rng2);
  auto& w0 = swapped.at("q.W0").value;
  for (int c = 0; c < cfg.d_in; ++c)
    std::swap(w0[c], w0[cfg.d_in + c]);
  auto& b0 = swapped.at("q.b0").value;
  std::swap(b0[0], b0[1]);

  Tape t2;
  BoundParams bp2 = bind(t2, swapped);
  Tensor out2 = layer.forward(t2, bp2, t2.leaf({2, cfg.d_in}, xv, false));
  for (int row = 0; row < 2; ++row)
    for (int k = 0; k < cfg.alpha; ++k) {
      CHECK(out2.value()[row * 4 + k] == out.value()[row * 4 + cfg.alpha + k]);
      CHECK(out2.value()[row * 4 + cfg.alpha + k] == out.value()[row * 4 + k]);
    }
}

TEST_CASE("single-layer gradient check") {
  for (std::uint64_t seed : {1u, 2u}) {
    QrunConfig cfg = small_cfg();
    cfg.activation = seed == 1 ? Act::tanh : Act::relu;
    QrunLayer layer(cfg, "q");
    ParamSet ps;
    SplitMix64 rng(seed);
    layer.init(ps, rng);
    SplitMix64 xr(seed + 50);
    Eigen::ArrayXd xv = randu(xr, 3 * cfg.d_in);
    auto loss = [&layer, xv, &cfg](Tape& t, const BoundParams& bp) {
      Tensor x = t.leaf({3, cfg.d_in}, xv, false);
      Tensor y = layer.forward(t, bp, x);
      return mean(mul(y, y));
    };
    GradCheckReport rep = grad_check(loss, ps, 1e-5, 1e-4);
    INFO("worst: " << rep.worst_param << " err " << rep.max_rel_err);
    CHECK(rep.pass);
  }
}

TEST_CASE("two stacked layers pass the end-to-end gradient check") {
  QrunConfig c1 = small_cfg();
  QrunConfig c2 = small_cfg();
  c2.d_in = c1.d_out;
  QrunLayer l1(c1, "a"), l2(c2, "b");
  ParamSet ps;
  SplitMix64 rng(33);
  l1.init(ps, rng);
  l2.init(ps, rng);
  SplitMix64 xr(34);
  Eigen::ArrayXd xv = randu(xr, 2 * c1.d_in);
  auto loss = [&](Tape& t, const BoundParams& bp) {
    Tensor x = t.leaf({2, c1.d_in}, xv, false);
    Tensor y = l2.forward(t, bp, l1.forward(t, bp, x));
    return mean(mul(y, y));
  };
  GradCheckReport rep = grad_check(loss, ps, 1e-5, 1e-4);
  INFO("worst: " << rep.worst_param << " err " << rep.max_rel_err);
  CHECK(rep.pass);
}

TEST_CASE("param_count matches the documented formula") {
  QrunConfig cfg;
  cfg.d_in = 64;
  cfg.d_out = 64;
  cfg.alpha = 2;
  cfg.n = 4;
  cfg.m = 8;
  cfg.use_bias_observable = false;
  CHECK(param_count_table1(cfg) == 2048 + 68 + 64 + 16);  // 2196
  CHECK(param_count(cfg) == 2196 + 32);                   // + b0

  QrunConfig tiny;  // smallest legal layer
  CHECK(param_count_table1(tiny) == 6);
  tiny.use_bias_observable = false;
  CHECK(param_count(tiny) == 7);
}

TEST_CASE("param_count equals the registered scalar count") {
  SplitMix64 rng(2718);
  for (int trial = 0; trial < 20; ++trial) {
    QrunConfig cfg;
    cfg.alpha = 1 + static_cast<int>(rng.uniform_index(4));
    cfg.d_out = cfg.alpha * (1 + static_cast<int>(rng.uniform_index(8)));
    cfg.d_in = 1 + static_cast<int>(rng.uniform_index(16));
    cfg.n = 1 + static_cast<int>(rng.uniform_index(8));
    cfg.m = 1 + static_cast<int>(rng.uniform_index(32));
    cfg.use_bias_observable = rng.uniform() < 0.5;
    QrunLayer layer(cfg, "q");
    ParamSet ps;
    layer.init(ps, rng);
    CHECK(ps.scalar_count() == param_count(cfg));
  }
}

TEST_CASE("parameter economy against a dense layer where the bound applies") {
  for (int d : {64, 128}) {
    QrunConfig cfg;
    cfg.d_in = d;
    cfg.d_out = d;
    cfg.alpha = 2;
    cfg.n = 4;
    cfg.m = 8;
    const long lhs = cfg.n * (1 + 2L * cfg.m) + 1L * cfg.m * cfg.m +
                     2L * cfg.m + d / 2;
    REQUIRE(lhs < 1L * d * d / 2);
    CHECK(param_count(cfg) < 1L * d * d + d);  // dense W + b
  }
}

TEST_CASE("config validation") {
  QrunConfig cfg = small_cfg();
  cfg.d_out = 5;  // not divisible by alpha = 2
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  cfg = small_cfg();
  cfg.w_max = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  cfg = small_cfg();
  cfg.n = 0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
}

#include "qrun/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "config_keys.hpp"

namespace qrun::model {

using ad::MatRM;
using ad::Tensor;
using nlohmann::json;

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

Tensor affine(ad::Tape&, const ad::BoundParams& bp, const Tensor& x,
              const std::string& w_name, const std::string& b_name) {
  return add_bias(matmul(x, transpose(bp.at(w_name))), bp.at(b_name));
}

Tensor activate(const Tensor& t, Act a) {
  return a == Act::tanh ? tanh(t) : relu(t);
}

// Dense stack shared by MlpModel and the RFF head.
struct Stack {
  std::vector<int> widths;  // d_in, hidden..., d_out
  std::string prefix;

  int layer_count() const { return static_cast<int>(widths.size()) - 1; }
  std::string w_name(int i) const {
    return prefix + std::to_string(i) + ".W";
  }
  std::string b_name(int i) const {
    return prefix + std::to_string(i) + ".b";
  }

  long param_count() const {
    long c = 0;
    for (int i = 0; i < layer_count(); ++i)
      c += static_cast<long>(widths[std::size_t(i) + 1]) *
               widths[std::size_t(i)] +
           widths[std::size_t(i) + 1];
    return c;
  }

  void init_fan_in(ad::ParamSet& ps, SplitMix64& rng) const {
    for (int i = 0; i < layer_count(); ++i) {
      const int in = widths[std::size_t(i)], out = widths[std::size_t(i) + 1];
      ps.add(w_name(i), {out, in}, fan_in_block(rng, out, in));
      ps.add(b_name(i), {out}, Eigen::ArrayXd::Zero(out));
    }
  }
};

}  // namespace

// --- MLP ---------------------------------------------------------------------

void MlpConfig::validate() const {
  if (d_in < 1 || d_out < 1) throw ContractError("mlp config: bad width");
  if (hidden.empty())
    throw ContractError("mlp config: at least one hidden layer");
  for (int h : hidden)
    if (h < 1) throw ContractError("mlp config: bad hidden width");
  if (sinusoidal && !(omega0 > 0.0))
    throw ContractError("mlp config: omega0 must be positive");
}

MlpModel::MlpModel(MlpConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

namespace {
Stack mlp_stack(const MlpConfig& cfg) {
  Stack s;
  s.prefix = "lin";
  s.widths.push_back(cfg.d_in);
  s.widths.insert(s.widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  s.widths.push_back(cfg.d_out);
  return s;
}
}  // namespace

void MlpModel::init(ad::ParamSet& params, SplitMix64& rng) const {
  const Stack s = mlp_stack(cfg_);
  if (!cfg_.sinusoidal) {
    s.init_fan_in(params, rng);
    return;
  }
  // Sinusoidal stack: flat first layer, later layers scaled down by omega0 so
  // pre-activations stay in the arcsine-distributed regime.
  for (int i = 0; i < s.layer_count(); ++i) {
    const int in = s.widths[std::size_t(i)], out = s.widths[std::size_t(i) + 1];
    const double bound =
        i == 0 ? 1.0 / in : std::sqrt(6.0 / in) / cfg_.omega0;
    params.add(s.w_name(i), {out, in},
               uniform_block(rng, static_cast<Eigen::Index>(out) * in, -bound,
                             bound));
    params.add(s.b_name(i), {out}, Eigen::ArrayXd::Zero(out));
  }
}

Tensor MlpModel::forward(ad::Tape& tape, const ad::BoundParams& bp,
                         const Tensor& x) const {
  const Stack s = mlp_stack(cfg_);
  Tensor h = x;
  for (int i = 0; i < s.layer_count(); ++i) {
    h = affine(tape, bp, h, s.w_name(i), s.b_name(i));
    if (i + 1 == s.layer_count()) break;  // linear readout
    h = cfg_.sinusoidal ? sin(scale(h, cfg_.omega0)) : activate(h, cfg_.activation);
  }
  return h;
}

long MlpModel::param_count() const { return mlp_stack(cfg_).param_count(); }

nlohmann::json MlpModel::config_json() const {
  json j{{"kind", cfg_.sinusoidal ? "siren" : "mlp"},
         {"d_in", cfg_.d_in},
         {"d_out", cfg_.d_out},
         {"hidden", cfg_.hidden}};
  if (cfg_.sinusoidal)
    j["omega0"] = cfg_.omega0;
  else
    j["activation"] = cfg_.activation == Act::tanh ? "tanh" : "relu";
  return j;
}

// --- RFF ---------------------------------------------------------------------

void RffConfig::validate() const {
  if (d_in < 1 || d_out < 1) throw ContractError("rff config: bad width");
  if (features < 1) throw ContractError("rff config: bad feature count");
  if (!(bandwidth > 0.0))
    throw ContractError("rff config: bandwidth must be positive");
  if (hidden.empty())
    throw ContractError("rff config: at least one hidden layer");
  for (int h : hidden)
    if (h < 1) throw ContractError("rff config: bad hidden width");
}

RffModel::RffModel(RffConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  SplitMix64 rng(cfg_.seed);
  b_.resize(cfg_.features, cfg_.d_in);
  for (int r = 0; r < cfg_.features; ++r)
    for (int c = 0; c < cfg_.d_in; ++c) b_(r, c) = cfg_.bandwidth * rng.normal();
}

namespace {
Stack rff_stack(const RffConfig& cfg) {
  Stack s;
  s.prefix = "head";
  s.widths.push_back(2 * cfg.features);
  s.widths.insert(s.widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  s.widths.push_back(cfg.d_out);
  return s;
}
}  // namespace

void RffModel::init(ad::ParamSet& params, SplitMix64& rng) const {
  rff_stack(cfg_).init_fan_in(params, rng);
}

Tensor rff_features(ad::Tape& tape, const Tensor& x,
                    const MatRM& projection) {
  MatRM proj = 2.0 * M_PI * projection.transpose();  // [d_in, features]
  Tensor theta = matmul(x, tape.constant(proj));
  return concat_cols(cos(theta), sin(theta));
}

Tensor RffModel::forward(ad::Tape& tape, const ad::BoundParams& bp,
                         const Tensor& x) const {
  Tensor h = rff_features(tape, x, b_);
  const Stack s = rff_stack(cfg_);
  for (int i = 0; i < s.layer_count(); ++i) {
    h = affine(tape, bp, h, s.w_name(i), s.b_name(i));
    if (i + 1 < s.layer_count()) h = activate(h, cfg_.activation);
  }
  return h;
}

long RffModel::param_count() const { return rff_stack(cfg_).param_count(); }

nlohmann::json RffModel::config_json() const {
  return json{{"kind", "rff"},
              {"d_in", cfg_.d_in},
              {"d_out", cfg_.d_out},
              {"features", cfg_.features},
              {"bandwidth", cfg_.bandwidth},
              {"hidden", cfg_.hidden},
              {"activation", cfg_.activation == Act::tanh ? "tanh" : "relu"},
              {"seed", cfg_.seed}};
}

// --- FAN ---------------------------------------------------------------------

void FanConfig::validate() const {
  if (d_in < 1 || d_out < 1) throw ContractError("fan config: bad width");
  if (hidden.empty())
    throw ContractError("fan config: at least one hidden layer");
  if (!(p_ratio > 0.0) || !(p_ratio < 1.0))
    throw ContractError("fan config: p_ratio must lie in (0,1)");
  for (int h : hidden) {
    const int dp = fourier_width(h);
    if (dp < 1 || h - 2 * dp < 1)
      throw ContractError("fan config: width " + std::to_string(h) +
                          " leaves no room for both channel groups");
  }
}

int FanConfig::fourier_width(int width) const {
  return static_cast<int>(std::floor(p_ratio * width + 0.5));
}

FanModel::FanModel(FanConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void FanModel::init(ad::ParamSet& params, SplitMix64& rng) const {
  int in = cfg_.d_in;
  for (std::size_t i = 0; i < cfg_.hidden.size(); ++i) {
    const int h = cfg_.hidden[i];
    const int dp = cfg_.fourier_width(h), dq = h - 2 * dp;
    const std::string p = "fan" + std::to_string(i);
    params.add(p + ".Wp", {dp, in}, fan_in_block(rng, dp, in));
    params.add(p + ".Wq", {dq, in}, fan_in_block(rng, dq, in));
    params.add(p + ".b", {dq}, Eigen::ArrayXd::Zero(dq));
    in = h;
  }
  params.add("readout.W", {cfg_.d_out, in}, fan_in_block(rng, cfg_.d_out, in));
  params.add("readout.b", {cfg_.d_out}, Eigen::ArrayXd::Zero(cfg_.d_out));
}

Tensor FanModel::forward(ad::Tape& tape, const ad::BoundParams& bp,
                         const Tensor& x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < cfg_.hidden.size(); ++i) {
    const std::string p = "fan" + std::to_string(i);
    Tensor f = matmul(h, transpose(bp.at(p + ".Wp")));
    Tensor g = activate(
        add_bias(matmul(h, transpose(bp.at(p + ".Wq"))), bp.at(p + ".b")),
        cfg_.activation);
    h = concat_cols(concat_cols(cos(f), sin(f)), g);
  }
  return affine(tape, bp, h, "readout.W", "readout.b");
}

long FanModel::param_count() const {
  long c = 0;
  int in = cfg_.d_in;
  for (int h : cfg_.hidden) {
    const int dp = cfg_.fourier_width(h), dq = h - 2 * dp;
    c += static_cast<long>(dp) * in + static_cast<long>(dq) * in + dq;
    in = h;
  }
  return c + static_cast<long>(cfg_.d_out) * in + cfg_.d_out;
}

nlohmann::json FanModel::config_json() const {
  return json{{"kind", "fan"},
              {"d_in", cfg_.d_in},
              {"d_out", cfg_.d_out},
              {"hidden", cfg_.hidden},
              {"p_ratio", cfg_.p_ratio},
              {"activation", cfg_.activation == Act::tanh ? "tanh" : "relu"}};
}

// --- re-uploading stack ---------------------------------------------------------

void QrunModelConfig::validate() const {
  if (d_in < 1 || d_out < 1) throw ContractError("qrun config: bad width");
  if (widths.empty())
    throw ContractError("qrun config: at least one re-uploading layer");
  for (std::size_t i = 0; i < widths.size(); ++i) layer(i).validate();
}

QrunConfig QrunModelConfig::layer(std::size_t i) const {
  QrunConfig c;
  c.d_in = i == 0 ? d_in : widths[i - 1];
  c.d_out = widths[i];
  c.alpha = alpha;
  c.n = n;
  c.m = m;
  c.activation = activation;
  c.use_bias_observable = use_bias_observable;
  c.w_max = w_max;
  return c;
}

QrunModel::QrunModel(QrunModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (std::size_t i = 0; i < cfg_.widths.size(); ++i)
    layers_.emplace_back(cfg_.layer(i), "q" + std::to_string(i));
}

void QrunModel::init(ad::ParamSet& params, SplitMix64& rng) const {
  for (const QrunLayer& l : layers_) l.init(params, rng);
  const int in = cfg_.widths.back();
  params.add("readout.W", {cfg_.d_out, in}, fan_in_block(rng, cfg_.d_out, in));
  params.add("readout.b", {cfg_.d_out}, Eigen::ArrayXd::Zero(cfg_.d_out));
}

Tensor QrunModel::forward(ad::Tape& tape, const ad::BoundParams& bp,
                          const Tensor& x) const {
  Tensor h = x;
  for (const QrunLayer& l : layers_) h = l.forward(tape, bp, h);
  return affine(tape, bp, h, "readout.W", "readout.b");
}

long QrunModel::param_count() const {
  long c = 0;
  for (const QrunLayer& l : layers_) c += qrun::param_count(l.config());
  return c + static_cast<long>(cfg_.d_out) * cfg_.widths.back() + cfg_.d_out;
}

nlohmann::json QrunModel::config_json() const {
  return json{{"kind", "qrun"},
              {"d_in", cfg_.d_in},
              {"d_out", cfg_.d_out},
              {"widths", cfg_.widths},
              {"alpha", cfg_.alpha},
              {"n", cfg_.n},
              {"m", cfg_.m},
              {"activation", cfg_.activation == Act::tanh ? "tanh" : "relu"},
              {"use_bias_observable", cfg_.use_bias_observable},
              {"w_max", cfg_.w_max}};
}

// --- construction ---------------------------------------------------------------

namespace {

using cfg::check_keys;
using cfg::get_int;
using cfg::get_int_or;
using cfg::get_num;
using cfg::get_num_or;
using cfg::need;

std::vector<int> get_widths(const json& j, const char* key,
                            const std::string& prefix) {
  const json& v = need(j, key, prefix);
  if (!v.is_array())
    throw ContractError("config: \"" + prefix + "/" + key +
                        "\" must be an array of widths");
  std::vector<int> out;
  for (const json& e : v) {
    if (!e.is_number_integer())
      throw ContractError("config: \"" + prefix + "/" + key +
                          "\" must hold integers");
    out.push_back(e.get<int>());
  }
  return out;
}

Act get_act(const json& j, const char* key, const std::string& prefix,
            Act fallback) {
  if (!j.contains(key)) return fallback;
  const std::string s = need(j, key, prefix).get<std::string>();
  if (s == "tanh") return Act::tanh;
  if (s == "relu") return Act::relu;
  throw ContractError("config: \"" + prefix + "/" + key +
                      "\" must be \"tanh\" or \"relu\"");
}

}  // namespace

std::unique_ptr<Model> make_model(const json& cfg,
                                  const std::string& path_prefix) {
  if (!cfg.is_object())
    throw ContractError("config: \"" + path_prefix + "\" must be an object");
  const std::string kind =
      need(cfg, "kind", path_prefix).get<std::string>();

  if (kind == "mlp" || kind == "siren") {
    MlpConfig c;
    c.sinusoidal = kind == "siren";
    if (c.sinusoidal) {
      check_keys(cfg, {"kind", "d_in", "d_out", "hidden", "omega0"},
                 path_prefix);
      c.omega0 = get_num_or(cfg, "omega0", path_prefix, 30.0);
    } else {
      check_keys(cfg, {"kind", "d_in", "d_out", "hidden", "activation"},
                 path_prefix);
      c.activation = get_act(cfg, "activation", path_prefix, Act::tanh);
    }
    c.d_in = get_int(cfg, "d_in", path_prefix);
    c.d_out = get_int(cfg, "d_out", path_prefix);
    c.hidden = get_widths(cfg, "hidden", path_prefix);
    return std::make_unique<MlpModel>(std::move(c));
  }
  if (kind == "rff") {
    check_keys(cfg,
               {"kind", "d_in", "d_out", "features", "bandwidth", "hidden",
                "activation", "seed"},
               path_prefix);
    RffConfig c;
    c.d_in = get_int(cfg, "d_in", path_prefix);
    c.d_out = get_int(cfg, "d_out", path_prefix);
    c.features = get_int(cfg, "features", path_prefix);
    c.bandwidth = get_num_or(cfg, "bandwidth", path_prefix, 1.0);
    c.hidden = get_widths(cfg, "hidden", path_prefix);
    c.activation = get_act(cfg, "activation", path_prefix, Act::relu);
    c.seed = qrun::cfg::get_u64_or(cfg, "seed", path_prefix, 0);
    return std::make_unique<RffModel>(std::move(c));
  }
  if (kind == "fan") {
    check_keys(cfg,
               {"kind", "d_in", "d_out", "hidden", "p_ratio", "activation"},
               path_prefix);
    FanConfig c;
    c.d_in = get_int(cfg, "d_in", path_prefix);
    c.d_out = get_int(cfg, "d_out", path_prefix);
    c.hidden = get_widths(cfg, "hidden", path_prefix);
    c.p_ratio = get_num_or(cfg, "p_ratio", path_prefix, 0.25);
    c.activation = get_act(cfg, "activation", path_prefix, Act::relu);
    return std::make_unique<FanModel>(std::move(c));
  }
  if (kind == "qrun") {
    check_keys(cfg,
               {"kind", "d_in", "d_out", "widths", "alpha", "n", "m",
                "activation", "use_bias_observable", "w_max"},
               path_prefix);
    QrunModelConfig c;
    c.d_in = get_int(cfg, "d_in", path_prefix);
    c.d_out = get_int(cfg, "d_out", path_prefix);
    c.widths = get_widths(cfg, "widths", path_prefix);
    c.alpha = get_int_or(cfg, "alpha", path_prefix, 2);
    c.n = get_int_or(cfg, "n", path_prefix, 4);
    c.m = get_int_or(cfg, "m", path_prefix, 8);
    c.activation = get_act(cfg, "activation", path_prefix, Act::tanh);
    if (cfg.contains("use_bias_observable")) {
      const json& v = cfg["use_bias_observable"];
      if (!v.is_boolean())
        throw ContractError("config: \"" + path_prefix +
                            "/use_bias_observable\" must be a boolean");
      c.use_bias_observable = v.get<bool>();
    }
    c.w_max = get_num_or(cfg, "w_max", path_prefix, 30.0);
    return std::make_unique<QrunModel>(std::move(c));
  }
  throw ContractError("config: unknown model kind \"" + kind + "\" at \"" +
                      path_prefix + "/kind\"");
}

int fit_width_to_budget(const std::function<long(int)>& count_for, long target,
                        int lo, int hi) {
  if (target < 1 || lo < 1 || hi < lo)
    throw ContractError("fit_width_to_budget: bad search range");
  int best_w = lo;
  long best_diff = std::abs(count_for(lo) - target);
  for (int w = lo + 1; w <= hi; ++w) {
    const long c = count_for(w);
    const long diff = std::abs(c - target);
    if (diff < best_diff) {
      best_diff = diff;
      best_w = w;
    }
    if (c > target && diff > best_diff) break;  // monotone: only worse ahead
  }
  if (best_diff * 20 > target)
    throw ContractError("fit_width_to_budget: nearest width " +
                        std::to_string(best_w) + " gives " +
                        std::to_string(count_for(best_w)) + " params, > 5% from " +
                        std::to_string(target));
  return best_w;
}

}  // namespace qrun::model

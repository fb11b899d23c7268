#include "qrun/bench.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <tuple>

#include "qrun/datasets.hpp"
#include "qrun/errors.hpp"
#include "qrun/models.hpp"
#include "qrun/training.hpp"

namespace qrun::bench {

namespace {

using nlohmann::json;

struct Eval {
  std::string name;
  learn::Metric metric;
  learn::Split split;
};

struct Job {
  std::string name;
  json model;
  const data::Dataset* data = nullptr;
  learn::TrainConfig train;
  std::vector<Eval> evals;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Two equal hidden layers sized to match a parameter budget.
std::vector<int> mlp_hidden_for(long target, int d_in) {
  const int w = model::fit_width_to_budget(
      [&](int width) {
        model::MlpConfig c;
        c.d_in = d_in;
        c.hidden = {width, width};
        return model::MlpModel(c).param_count();
      },
      target);
  return {w, w};
}

std::vector<int> fan_hidden_for(long target, int d_in) {
  const int w = model::fit_width_to_budget(
      [&](int width) {
        model::FanConfig c;
        c.d_in = d_in;
        c.hidden = {width, width};
        return model::FanModel(c).param_count();
      },
      target, /*lo=*/4);  // p_ratio 0.25 needs width >= 4 for a cos channel
  return {w, w};
}

json mlp_cfg(int d_in, const std::vector<int>& hidden, const char* act) {
  return {{"kind", "mlp"},
          {"d_in", d_in},
          {"d_out", 1},
          {"hidden", hidden},
          {"activation", act}};
}

learn::TrainConfig mse_train(int epochs, double lr) {
  learn::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.adam.lr = lr;
  cfg.loss = learn::LossKind::mse;
  return cfg;
}

learn::TrainConfig nll_train(int epochs, double lr) {
  learn::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.adam.lr = lr;
  cfg.loss = learn::LossKind::nll_normalized;
  return cfg;
}

const std::vector<Eval> kFitEvals = {
    {"train_mse", learn::Metric::mse, learn::Split::train},
    {"test_mse", learn::Metric::mse, learn::Split::test}};

// --- suite definitions ----------------------------------------------------

// Regression against a sampled 8-layer single-qubit circuit; the test split
// sits outside the training band, so extrapolation is what's scored.
void rq1_jobs(std::vector<data::Dataset>& store, std::vector<Job>& jobs) {
  store.push_back(data::drqc_dataset(qc::DrqcSpec::random_single_qubit(8, 424242),
                                     31337, 1000));
  const data::Dataset* ds = &store.back();

  const json qrun = {{"kind", "qrun"}, {"d_in", 1},  {"d_out", 1},
                     {"widths", json::array({32, 32})}, {"alpha", 2},
                     {"n", 4},         {"m", 32}};
  const long budget = model::make_model(qrun, "/bench")->param_count();

  const std::vector<int> mlp_h = mlp_hidden_for(budget, 1);
  const std::vector<int> fan_h = fan_hidden_for(budget, 1);

  const learn::TrainConfig tr = mse_train(6000, 2e-3);
  jobs.push_back({"qrun", qrun, ds, tr, kFitEvals});
  jobs.push_back({"mlp_tanh", mlp_cfg(1, mlp_h, "tanh"), ds, tr, kFitEvals});
  jobs.push_back({"mlp_relu", mlp_cfg(1, mlp_h, "relu"), ds, tr, kFitEvals});
  jobs.push_back({"fan",
                  {{"kind", "fan"}, {"d_in", 1}, {"d_out", 1},
                   {"hidden", fan_h}, {"p_ratio", 0.25}},
                  ds, tr, kFitEvals});
}

// Density estimation on two 25-component Gaussian mixtures: px1 draws wide
// stddevs (smooth), px2 narrow ones (abrupt peaks).
void de_jobs(std::vector<data::Dataset>& store, std::vector<Job>& jobs) {
  store.push_back(data::mixture_dataset(11, 12, 1024, 0.08, 1.0));
  store.push_back(data::mixture_dataset(21, 22, 1024, 0.08, 0.1));

  const json qrun = {{"kind", "qrun"}, {"d_in", 1},  {"d_out", 1},
                     {"widths", json::array({32, 32})}, {"alpha", 2},
                     {"n", 4},         {"m", 16}};

  const learn::TrainConfig tr = nll_train(3000, 2e-3);
  for (int i = 0; i < 2; ++i) {
    const data::Dataset* ds = &store[i];
    const std::vector<Eval> evals = {
        {i == 0 ? "kl_px1" : "kl_px2", learn::Metric::kl,
         learn::Split::train}};
    jobs.push_back({"qrun", qrun, ds, tr, evals});
    jobs.push_back({"mlp_tanh", mlp_cfg(1, {64, 64}, "tanh"), ds, tr, evals});
    jobs.push_back({"mlp_relu", mlp_cfg(1, {64, 64}, "relu"), ds, tr, evals});
  }
}

// Implicit reconstruction of a radially chirped image; every pixel trains.
void ir_jobs(std::vector<data::Dataset>& store, std::vector<Job>& jobs) {
  store.push_back(data::image_dataset("radial_chirp", 32));
  const data::Dataset* ds = &store.back();
  const std::vector<Eval> evals = {
      {"train_mse", learn::Metric::mse, learn::Split::train}};

  const json qrun = {{"kind", "qrun"}, {"d_in", 2},  {"d_out", 1},
                     {"widths", json::array({16, 16})}, {"alpha", 2},
                     {"n", 4},         {"m", 10}};

  const learn::TrainConfig tr = mse_train(3000, 3e-3);
  jobs.push_back({"qrun", qrun, ds, tr, evals});
  jobs.push_back({"mlp_relu", mlp_cfg(2, mlp_hidden_for(840, 2), "relu"), ds,
                  tr, evals});
}

// Frequency-count sweep at fixed width on the rq1 task.
void ablation_jobs(std::vector<data::Dataset>& store, std::vector<Job>& jobs) {
  store.push_back(data::drqc_dataset(qc::DrqcSpec::random_single_qubit(8, 424242),
                                     31337, 1000));
  const data::Dataset* ds = &store.back();

  const learn::TrainConfig tr = mse_train(4000, 2e-3);
  for (int n = 1; n <= 4; ++n) {
    const json cfg = {{"kind", "qrun"}, {"d_in", 1},  {"d_out", 1},
                      {"widths", json::array({16, 16})}, {"alpha", 2},
                      {"n", n},         {"m", 8}};
    jobs.push_back({"qrun_n" + std::to_string(n), cfg, ds, tr, kFitEvals});
  }
}

}  // namespace

bool known_suite(const std::string& suite) {
  return suite == "rq1" || suite == "de" || suite == "ir" ||
         suite == "ablation";
}

void tune_allocator() {
#if defined(__GLIBC__)
  // Keep tape-sized blocks on the heap; mmap-backed allocations get
  // re-zeroed by the kernel on every epoch.
  mallopt(M_MMAP_MAX, 0);
  mallopt(M_TRIM_THRESHOLD, -1);
#endif
}

std::vector<BenchRow> run_suite(const std::string& suite,
                                const SuiteOptions& opts) {
  if (!known_suite(suite))
    throw ContractError("bench: unknown suite \"" + suite + "\"");
  tune_allocator();

  std::vector<data::Dataset> store;
  store.reserve(2);
  std::vector<Job> jobs;
  if (suite == "rq1") rq1_jobs(store, jobs);
  if (suite == "de") de_jobs(store, jobs);
  if (suite == "ir") ir_jobs(store, jobs);
  if (suite == "ablation") ablation_jobs(store, jobs);

  const auto wanted = [](const std::vector<std::string>& filter,
                         const std::string& name) {
    return filter.empty() ||
           std::find(filter.begin(), filter.end(), name) != filter.end();
  };

  std::vector<BenchRow> rows;
  for (const Job& job : jobs) {
    if (!wanted(opts.only, job.name)) continue;
    std::vector<Eval> evals;
    for (const Eval& ev : job.evals)
      if (wanted(opts.metrics, ev.name)) evals.push_back(ev);
    if (evals.empty()) continue;  // nothing to score; skip the training too

    const auto m = model::make_model(job.model, "/bench");
    const long params = m->param_count();
    for (std::uint64_t seed : opts.seeds) {
      learn::TrainConfig cfg = job.train;
      cfg.seed = seed;
      if (opts.epochs > 0) cfg.epochs = opts.epochs;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const learn::TrainResult res = learn::train(*m, *job.data, cfg);
        for (const Eval& ev : evals) {
          const double v = learn::evaluate(*m, res.params, *job.data,
                                           ev.metric, ev.split, &cfg.grid);
          rows.push_back({job.name, params, ev.name, v, seed,
                          res.metrics.wall_seconds, "ok"});
        }
      } catch (const std::exception& e) {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        for (const Eval& ev : evals)
          rows.push_back({job.name, params, ev.name, kNaN, seed, wall,
                          e.what()});
      }
    }
  }

  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.model, a.metric, a.seed) <
           std::tie(b.model, b.metric, b.seed);
  });
  return rows;
}

io::CsvTable bench_table(const std::vector<BenchRow>& rows) {
  io::CsvTable t;
  t.header = {"model", "param_count", "metric", "value",
              "seed",  "wall_seconds", "status"};
  for (const BenchRow& r : rows)
    t.rows.push_back({r.model, std::to_string(r.param_count), r.metric,
                      io::format_double(r.value), std::to_string(r.seed),
                      io::format_double(r.wall_seconds), r.status});
  return t;
}

double median_value(const std::vector<BenchRow>& rows, const std::string& model,
                    const std::string& metric) {
  std::vector<double> vals;
  for (const BenchRow& r : rows)
    if (r.model == model && r.metric == metric && r.status == "ok")
      vals.push_back(r.value);
  if (vals.empty()) return kNaN;
  std::sort(vals.begin(), vals.end());
  const std::size_t h = vals.size() / 2;
  return vals.size() % 2 ? vals[h] : 0.5 * (vals[h - 1] + vals[h]);
}

}  // namespace qrun::bench

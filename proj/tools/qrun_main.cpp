// Experiment driver: predicted spectra with fit verification, circuit
// simulation to CSV, config-driven training runs, and benchmark suites.
//
// Exit codes: 0 ok, 1 contract violation, 2 degenerate-but-completed,
// 3 training divergence.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qrun/bench.hpp"
#include "qrun/datasets.hpp"
#include "qrun/errors.hpp"
#include "qrun/io.hpp"
#include "qrun/models.hpp"
#include "qrun/quantum.hpp"
#include "qrun/rng.hpp"
#include "qrun/run_config.hpp"
#include "qrun/spectrum.hpp"
#include "qrun/training.hpp"

namespace {

using namespace qrun;
using nlohmann::json;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const std::string& tok : split_list(s)) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw ContractError(std::string(what) + ": bad number \"" + tok + "\"");
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint64_t> parse_u64s(const std::string& s, const char* what) {
  std::vector<std::uint64_t> out;
  for (const std::string& tok : split_list(s)) {
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
      throw ContractError(std::string(what) + ": bad integer \"" + tok + "\"");
    out.push_back(v);
  }
  return out;
}

std::string version_comment() {
  return std::string("artifact_version=") + io::kArtifactVersion;
}

void print_metric(const char* name, double value) {
  std::printf("METRIC %s=%s\n", name, io::format_double(value).c_str());
}

// --- spectrum ---------------------------------------------------------------

int cmd_spectrum(const std::string& w_arg, int n, int d, double tau,
                 std::uint64_t seed) {
  const std::vector<double> w = parse_doubles(w_arg, "spectrum --w");
  if (n < 1 || d < 1)
    throw ContractError("spectrum: --n and --d must be positive");
  if (static_cast<int>(w.size()) != n)
    throw ContractError("spectrum: --w must list exactly n weights, got " +
                        std::to_string(w.size()));
  if (n * d > 8)
    throw ContractError(
        "spectrum: n*d must stay <= 8 for the fit verification");
  if (!(tau > 0)) throw ContractError("spectrum: --tau must be positive");

  const qc::FrequencySet fs = qc::predicted_spectrum(w, d, tau);
  long full = 1;
  for (int i = 0; i < n * d; ++i) full *= 3;

  // Synthesize a random function whose spectrum is exactly the predicted
  // set, then confirm the fit on that set explains it to round-off.
  SplitMix64 rng(seed);
  struct Term {
    Eigen::VectorXd freq;
    double amp, phase;
  };
  std::vector<Term> terms;
  for (const Eigen::VectorXd& f : fs.freqs) {
    int sign = 0;
    for (Eigen::Index j = 0; j < f.size() && sign == 0; ++j)
      if (std::abs(f[j]) > fs.tol) sign = f[j] > 0 ? 1 : -1;
    if (sign < 0) continue;  // mirror of a positive-leading term
    const double amp = rng.uniform(0.3, 1.0);
    const double phase = sign == 0 ? 0.0 : rng.uniform(0.0, 2 * M_PI);
    terms.push_back({f, amp, phase});
  }
  const long samples = std::max<long>(1024, 2 * static_cast<long>(fs.size()));
  std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(samples),
                                  Eigen::VectorXd(d));
  Eigen::VectorXd y(samples);
  for (long s = 0; s < samples; ++s) {
    Eigen::VectorXd& x = xs[static_cast<std::size_t>(s)];
    for (int j = 0; j < d; ++j) x[j] = rng.uniform(-M_PI, M_PI);
    double v = 0;
    for (const Term& t : terms) v += t.amp * std::cos(t.freq.dot(x) + t.phase);
    y[s] = v;
  }
  const qc::FourierFit fit = qc::fourier_fit(xs, y, fs);

  io::CsvTable t;
  const json echo = {{"command", "spectrum"}, {"w", w},     {"n", n},
                     {"d", d},                {"tau", tau}, {"seed", seed}};
  t.comments = {version_comment(),
                "config_hash=" + io::config_hash(echo),
                "seed=" + std::to_string(seed),
                "cardinality=" + std::to_string(fs.size()),
                "max_cardinality=" + std::to_string(full),
                "fit_rms_residual=" + io::format_double(fit.rms_residual)};
  for (int j = 0; j < d; ++j) t.header.push_back("freq_" + std::to_string(j));
  t.header.push_back("magnitude");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    std::vector<std::string> row;
    for (int j = 0; j < d; ++j)
      row.push_back(io::format_double(fs.freqs[i][j]));
    row.push_back(io::format_double(std::abs(fit.coeffs[i])));
    t.rows.push_back(std::move(row));
  }
  std::fputs(io::render_csv(t).c_str(), stdout);

  if (fit.rms_residual >= 1e-8) {
    std::fprintf(stderr,
                 "error: fit residual %.3e misses the 1e-8 verification gate\n",
                 fit.rms_residual);
    return 1;
  }
  if (static_cast<long>(fs.size()) < full) {
    std::fprintf(stderr,
                 "warning: degenerate weights reach %zu of %ld frequencies\n",
                 fs.size(), full);
    return 2;
  }
  return 0;
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const std::string& spec_path, int layers,
                 std::uint64_t circuit_seed, std::uint64_t seed, int count,
                 double domain, double train_band,
                 const std::string& out_flag) {
  qc::DrqcSpec spec;
  if (!spec_path.empty())
    spec = qc::DrqcSpec::from_json(json::parse(io::read_file(spec_path)));
  else
    spec = qc::DrqcSpec::random_single_qubit(layers, circuit_seed);

  const data::Dataset ds =
      data::drqc_dataset(spec, seed, count, domain, train_band);

  io::CsvTable t = io::dataset_to_csv(ds);
  const json echo = {{"command", "simulate"},   {"spec", spec.to_json()},
                     {"seed", seed},            {"count", count},
                     {"domain", domain},        {"train_band", train_band}};
  t.comments.insert(t.comments.begin(),
                    {version_comment(), "config_hash=" + io::config_hash(echo)});

  const std::filesystem::path dir = runcfg::resolve_output_dir(out_flag);
  const std::filesystem::path file = dir / "dataset.csv";
  io::write_csv(file, t);
  std::fprintf(stderr, "wrote %s\n", file.string().c_str());
  return 0;
}

// --- train --------------------------------------------------------------------

int cmd_train(const std::string& config_path, const std::string& out_flag) {
  const runcfg::RunConfig rc =
      runcfg::parse_run_config(json::parse(io::read_file(config_path)));
  const auto model = model::make_model(rc.model, "/model");
  const data::Dataset ds = runcfg::build_task(rc.task);

  const learn::TrainResult res = learn::train(*model, ds, rc.train);

  const std::string hash = io::config_hash(rc.doc);
  const std::filesystem::path dir =
      !out_flag.empty() ? out_flag : runcfg::resolve_output_dir(rc.output_dir);

  io::Checkpoint ck;
  ck.kind = model->kind();
  ck.config = rc.model;
  ck.seed = rc.seed;
  ck.config_hash = hash;
  ck.params = res.params;
  io::save_checkpoint(dir / "checkpoint.json", ck);

  io::CsvTable t;
  t.comments = {version_comment(), "config_hash=" + hash,
                "seed=" + std::to_string(rc.seed)};
  t.header = {"epoch", "train_loss"};
  for (std::size_t i = 0; i < res.metrics.train_loss.size(); ++i)
    t.rows.push_back(
        {std::to_string(i + 1), io::format_double(res.metrics.train_loss[i])});
  io::write_csv(dir / "metrics.csv", t);

  print_metric("final_train_loss", res.metrics.train_loss.back());
  if (rc.train.loss == learn::LossKind::mse && !ds.test_idx.empty())
    print_metric("test_mse",
                 learn::evaluate(*model, res.params, ds, learn::Metric::mse,
                                 learn::Split::test));
  if (rc.train.loss == learn::LossKind::nll_normalized &&
      ds.provenance.generator == "mixture")
    print_metric("kl",
                 learn::evaluate(*model, res.params, ds, learn::Metric::kl,
                                 learn::Split::train, &rc.train.grid));
  print_metric("wall_seconds", res.metrics.wall_seconds);
  std::fprintf(stderr, "wrote %s and %s\n",
               (dir / "checkpoint.json").string().c_str(),
               (dir / "metrics.csv").string().c_str());
  return 0;
}

// --- bench --------------------------------------------------------------------

int cmd_bench(const std::string& suite, const std::string& seeds_arg,
              const std::string& only_arg, const std::string& metrics_arg,
              int epochs, const std::string& out_flag) {
  bench::SuiteOptions opts;
  if (!seeds_arg.empty()) opts.seeds = parse_u64s(seeds_arg, "bench --seeds");
  opts.only = split_list(only_arg);
  opts.metrics = split_list(metrics_arg);
  opts.epochs = epochs;

  const std::vector<bench::BenchRow> rows = bench::run_suite(suite, opts);

  io::CsvTable t = bench::bench_table(rows);
  json seeds_echo = json::array();
  for (std::uint64_t s : opts.seeds) seeds_echo.push_back(s);
  const json echo = {{"command", "bench"},     {"suite", suite},
                     {"seeds", seeds_echo},    {"only", opts.only},
                     {"metrics", opts.metrics}, {"epochs", epochs}};
  t.comments = {version_comment(), "config_hash=" + io::config_hash(echo)};

  const std::filesystem::path dir = runcfg::resolve_output_dir(out_flag);
  const std::filesystem::path file = dir / ("bench_" + suite + ".csv");
  io::write_csv(file, t);

  // One scrape-friendly line per (model, metric) pair, in row order.
  std::vector<std::pair<std::string, std::string>> seen;
  for (const bench::BenchRow& r : rows) {
    const auto key = std::make_pair(r.model, r.metric);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    print_metric((r.model + "_" + r.metric + "_median").c_str(),
                 bench::median_value(rows, r.model, r.metric));
  }
  std::fprintf(stderr, "wrote %s\n", file.string().c_str());

  bool any_ok = rows.empty();
  for (const bench::BenchRow& r : rows) any_ok = any_ok || r.status == "ok";
  return any_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  bench::tune_allocator();

  CLI::App app{
      "Data re-uploading networks: spectra, simulation, training, benchmarks"};
  app.require_subcommand(1);

  auto* sp = app.add_subcommand(
      "spectrum", "Predict the reachable frequency set and verify it by fit");
  std::string sp_w;
  int sp_n = 1, sp_d = 1;
  double sp_tau = 1e-9;
  std::uint64_t sp_seed = 0;
  sp->add_option("--w", sp_w, "comma-separated re-upload weights (n values)")
      ->required();
  sp->add_option("--n", sp_n, "re-uploads per input dimension")->required();
  sp->add_option("--d", sp_d, "input dimensions");
  sp->add_option("--tau", sp_tau, "frequency collapse tolerance");
  sp->add_option("--seed", sp_seed, "draw seed for the verification function");

  auto* sim = app.add_subcommand("simulate",
                                 "Sample a re-uploading circuit into a CSV "
                                 "dataset");
  std::string sim_spec, sim_out;
  int sim_layers = 8, sim_count = 1000;
  std::uint64_t sim_cseed = 424242, sim_seed = 31337;
  double sim_domain = 20.0, sim_band = 10.0;
  sim->add_option("--spec", sim_spec, "circuit spec JSON file");
  sim->add_option("--layers", sim_layers,
                  "layers of the default single-qubit circuit");
  sim->add_option("--circuit-seed", sim_cseed, "circuit draw seed");
  sim->add_option("--seed", sim_seed, "input sampling seed");
  sim->add_option("--count", sim_count, "points to sample");
  sim->add_option("--domain", sim_domain, "inputs drawn from U(-domain, domain)");
  sim->add_option("--train-band", sim_band, "|x| <= band rows become train");
  sim->add_option("--output-dir", sim_out, "where dataset.csv lands");

  auto* tr = app.add_subcommand("train", "Run a training config");
  std::string tr_config, tr_out;
  tr->add_option("config", tr_config, "JSON run config")->required();
  tr->add_option("--output-dir", tr_out,
                 "overrides the config and QRUN_OUTPUT_DIR");

  auto* be = app.add_subcommand("bench", "Run a benchmark suite");
  std::string be_suite, be_seeds, be_only, be_metrics, be_out;
  int be_epochs = 0;
  be->add_option("suite", be_suite, "rq1 | de | ir | ablation")->required();
  be->add_option("--seeds", be_seeds, "comma-separated seeds (default 1,2,3)");
  be->add_option("--only", be_only, "restrict to these model names");
  be->add_option("--metrics", be_metrics, "restrict to these metric names");
  be->add_option("--epochs", be_epochs, "override the suite's epoch count");
  be->add_option("--output-dir", be_out, "where bench_<suite>.csv lands");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*sp) return cmd_spectrum(sp_w, sp_n, sp_d, sp_tau, sp_seed);
    if (*sim)
      return cmd_simulate(sim_spec, sim_layers, sim_cseed, sim_seed, sim_count,
                          sim_domain, sim_band, sim_out);
    if (*tr) return cmd_train(tr_config, tr_out);
    if (*be)
      return cmd_bench(be_suite, be_seeds, be_only, be_metrics, be_epochs,
                       be_out);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

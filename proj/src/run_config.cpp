#include "qrun/run_config.hpp"

#include <cstdlib>

#include "config_keys.hpp"
#include "qrun/io.hpp"
#include "qrun/quantum.hpp"

namespace qrun::runcfg {

using nlohmann::json;

namespace {

learn::TrainConfig parse_train(const json& t) {
  if (!t.is_object())
    throw ContractError("config: \"/train\" must be an object");
  cfg::check_keys(t,
                  {"epochs", "learning_rate", "beta1", "beta2", "eps", "loss",
                   "batch", "grid"},
                  "/train");
  learn::TrainConfig out;
  out.epochs = cfg::get_int_or(t, "epochs", "/train", out.epochs);
  out.adam.lr = cfg::get_num_or(t, "learning_rate", "/train", out.adam.lr);
  out.adam.beta1 = cfg::get_num_or(t, "beta1", "/train", out.adam.beta1);
  out.adam.beta2 = cfg::get_num_or(t, "beta2", "/train", out.adam.beta2);
  out.adam.eps = cfg::get_num_or(t, "eps", "/train", out.adam.eps);
  out.batch = cfg::get_int_or(t, "batch", "/train", 0);

  const std::string loss = cfg::get_str_or(t, "loss", "/train", "mse");
  if (loss == "mse")
    out.loss = learn::LossKind::mse;
  else if (loss == "nll")
    out.loss = learn::LossKind::nll_normalized;
  else
    throw ContractError("config: \"/train/loss\" must be \"mse\" or \"nll\"");

  if (t.contains("grid")) {
    const json& g = t["grid"];
    if (!g.is_object())
      throw ContractError("config: \"/train/grid\" must be an object");
    cfg::check_keys(g, {"lo", "hi", "points"}, "/train/grid");
    out.grid.lo = cfg::get_num_or(g, "lo", "/train/grid", out.grid.lo);
    out.grid.hi = cfg::get_num_or(g, "hi", "/train/grid", out.grid.hi);
    out.grid.points = cfg::get_int_or(g, "points", "/train/grid",
                                      out.grid.points);
  }
  return out;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object())
    throw ContractError("config: top level must be an object");
  cfg::check_keys(doc, {"task", "model", "train", "seed", "output_dir"}, "");

  RunConfig rc;
  rc.task = cfg::need(doc, "task", "");
  rc.model = cfg::need(doc, "model", "");
  rc.seed = cfg::get_u64_or(doc, "seed", "", 0);
  rc.output_dir = cfg::get_str_or(doc, "output_dir", "", "");
  rc.train = doc.contains("train") ? parse_train(doc["train"])
                                   : learn::TrainConfig{};
  rc.train.seed = rc.seed;
  rc.train.validate();

  rc.doc = doc;
  rc.doc["seed"] = rc.seed;  // make the echoed config replay-exact
  return rc;
}

data::Dataset build_task(const json& task) {
  if (!task.is_object())
    throw ContractError("config: \"/task\" must be an object");
  const std::string kind = cfg::get_str(task, "kind", "/task");

  if (kind == "mixture") {
    cfg::check_keys(task,
                    {"kind", "mixture_seed", "sample_seed", "count",
                     "sigma_lo", "sigma_hi", "k", "mu_lo", "mu_hi"},
                    "/task");
    return data::mixture_dataset(
        cfg::get_u64(task, "mixture_seed", "/task"),
        cfg::get_u64(task, "sample_seed", "/task"),
        cfg::get_int_or(task, "count", "/task", 1024),
        cfg::get_num(task, "sigma_lo", "/task"),
        cfg::get_num(task, "sigma_hi", "/task"),
        cfg::get_int_or(task, "k", "/task", 25),
        cfg::get_num_or(task, "mu_lo", "/task", -8.0),
        cfg::get_num_or(task, "mu_hi", "/task", 8.0));
  }
  if (kind == "drqc") {
    cfg::check_keys(task,
                    {"kind", "seed", "layers", "qubits", "dataset_seed",
                     "count", "domain", "train_band"},
                    "/task");
    const std::uint64_t seed = cfg::get_u64_or(task, "seed", "/task", 0);
    const int qubits = cfg::get_int_or(task, "qubits", "/task", 1);
    qc::DrqcSpec spec;
    if (qubits == 1) {
      spec = qc::DrqcSpec::random_single_qubit(
          cfg::get_int_or(task, "layers", "/task", 8), seed);
    } else {
      if (task.contains("layers"))
        throw ContractError(
            "config: \"/task/layers\" only applies to single-qubit circuits");
      spec = qc::DrqcSpec::random_multiqubit(qubits, seed);
    }
    return data::drqc_dataset(spec,
                              cfg::get_u64_or(task, "dataset_seed", "/task", 0),
                              cfg::get_int_or(task, "count", "/task", 1000),
                              cfg::get_num_or(task, "domain", "/task", 20.0),
                              cfg::get_num_or(task, "train_band", "/task", 10.0));
  }
  if (kind == "image") {
    cfg::check_keys(task, {"kind", "image", "size", "path"}, "/task");
    if (task.contains("path")) {
      if (task.contains("image") || task.contains("size"))
        throw ContractError(
            "config: \"/task/path\" excludes \"image\" and \"size\"");
      const std::string path = cfg::get_str(task, "path", "/task");
      return data::image_dataset(io::read_pgm(path), path);
    }
    return data::image_dataset(
        cfg::get_str_or(task, "image", "/task", "radial_chirp"),
        cfg::get_int_or(task, "size", "/task", 32));
  }
  if (kind == "signal") {
    cfg::check_keys(task, {"kind", "seed", "count"}, "/task");
    return data::signal_dataset(cfg::get_u64_or(task, "seed", "/task", 0),
                                cfg::get_int_or(task, "count", "/task", 1000));
  }
  throw ContractError("config: unknown task kind \"" + kind +
                      "\" at \"/task/kind\"");
}

std::string resolve_output_dir(const std::string& from_config) {
  if (!from_config.empty()) return from_config;
  if (const char* env = std::getenv("QRUN_OUTPUT_DIR"); env && *env)
    return env;
  return ".";
}

}  // namespace qrun::runcfg

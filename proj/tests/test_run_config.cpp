#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "qrun/datasets.hpp"
#include "qrun/errors.hpp"
#include "qrun/io.hpp"
#include "qrun/run_config.hpp"

using namespace qrun;
using nlohmann::json;

namespace {

json base_doc() {
  return {{"task", {{"kind", "signal"}, {"seed", 3}, {"count", 16}}},
          {"model",
           {{"kind", "mlp"}, {"d_in", 1}, {"d_out", 1},
            {"hidden", json::array({4})}}}};
}

std::string thrown_message(const json& doc) {
  try {
    runcfg::parse_run_config(doc);
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults fill a minimal config") {
  const runcfg::RunConfig rc = runcfg::parse_run_config(base_doc());
  CHECK(rc.seed == 0);
  CHECK(rc.train.seed == 0);
  CHECK(rc.train.epochs == 1);
  CHECK(rc.train.adam.lr == 1e-3);
  CHECK(rc.train.loss == learn::LossKind::mse);
  CHECK(rc.train.batch == 0);
  CHECK(rc.output_dir.empty());
  CHECK(rc.doc["seed"] == 0);  // echo is replay-exact even when defaulted
}

TEST_CASE("full train section lands in the config") {
  json doc = base_doc();
  doc["seed"] = 77;
  doc["output_dir"] = "runs/a";
  doc["train"] = {{"epochs", 12},       {"learning_rate", 5e-3},
                  {"beta1", 0.8},       {"beta2", 0.95},
                  {"eps", 1e-9},        {"loss", "nll"},
                  {"batch", 32},
                  {"grid", {{"lo", -6.0}, {"hi", 6.0}, {"points", 512}}}};
  const runcfg::RunConfig rc = runcfg::parse_run_config(doc);
  CHECK(rc.seed == 77);
  CHECK(rc.train.seed == 77);
  CHECK(rc.train.epochs == 12);
  CHECK(rc.train.adam.lr == 5e-3);
  CHECK(rc.train.adam.beta1 == 0.8);
  CHECK(rc.train.adam.beta2 == 0.95);
  CHECK(rc.train.adam.eps == 1e-9);
  CHECK(rc.train.loss == learn::LossKind::nll_normalized);
  CHECK(rc.train.batch == 32);
  CHECK(rc.train.grid.lo == -6.0);
  CHECK(rc.train.grid.hi == 6.0);
  CHECK(rc.train.grid.points == 512);
  CHECK(rc.output_dir == "runs/a");
}

TEST_CASE("unknown keys are named by JSON pointer") {
  json doc = base_doc();
  doc["train"] = {{"lerning_rate", 1e-3}};
  CHECK(thrown_message(doc) ==
        "config: unknown key \"/train/lerning_rate\"");

  doc = base_doc();
  doc["outputdir"] = ".";
  CHECK(thrown_message(doc) == "config: unknown key \"/outputdir\"");

  doc = base_doc();
  doc["train"] = {{"grid", {{"step", 0.5}}}};
  CHECK(thrown_message(doc) == "config: unknown key \"/train/grid/step\"");
}

TEST_CASE("bad train values are rejected") {
  json doc = base_doc();
  doc["train"] = {{"loss", "huber"}};
  CHECK_THROWS_AS(runcfg::parse_run_config(doc), ContractError);

  doc = base_doc();
  doc["train"] = {{"epochs", 0}};
  CHECK_THROWS(runcfg::parse_run_config(doc));

  doc = base_doc();
  doc["seed"] = -4;
  CHECK_THROWS_AS(runcfg::parse_run_config(doc), ContractError);

  doc = base_doc();
  doc.erase("model");
  CHECK(thrown_message(doc) == "config: missing key \"/model\"");
}

TEST_CASE("mixture task matches the direct generator") {
  const json task = {{"kind", "mixture"}, {"mixture_seed", 21},
                     {"sample_seed", 22}, {"count", 128},
                     {"sigma_lo", 0.08},  {"sigma_hi", 0.1}};
  const data::Dataset ds = runcfg::build_task(task);
  const data::Dataset ref = data::mixture_dataset(21, 22, 128, 0.08, 0.1);
  CHECK(ds.provenance.generator == "mixture");
  CHECK(ds.count() == 128);
  CHECK(ds.d_target() == 0);
  CHECK(ds.inputs == ref.inputs);
}

TEST_CASE("drqc task matches the direct generator") {
  const json task = {{"kind", "drqc"},        {"seed", 424242},
                     {"layers", 8},           {"dataset_seed", 31337}};
  const data::Dataset ds = runcfg::build_task(task);
  const data::Dataset ref = data::drqc_dataset(
      qc::DrqcSpec::random_single_qubit(8, 424242), 31337, 1000);
  CHECK(ds.count() == 1000);
  CHECK(ds.inputs == ref.inputs);
  CHECK(ds.targets == ref.targets);
  CHECK(ds.train_idx == ref.train_idx);

  const json multi = {{"kind", "drqc"}, {"qubits", 3}, {"seed", 5},
                      {"count", 50},    {"dataset_seed", 6}};
  const data::Dataset m = runcfg::build_task(multi);
  CHECK(m.count() == 50);
  CHECK(m.d_in() == 1);

  json bad = multi;
  bad["layers"] = 2;
  CHECK_THROWS_AS(runcfg::build_task(bad), ContractError);
}

TEST_CASE("image task: generated and loaded") {
  const data::Dataset gen = runcfg::build_task({{"kind", "image"}});
  CHECK(gen.count() == 32 * 32);
  CHECK(gen.d_in() == 2);
  CHECK(gen.provenance.generator == "image");

  const auto dir = std::filesystem::temp_directory_path() / "qrun_runcfg";
  std::filesystem::create_directories(dir);
  const auto pgm = dir / "chirp.pgm";
  io::write_pgm(pgm, data::synth_image("radial_chirp", 8), false);
  const data::Dataset ext = runcfg::build_task(
      {{"kind", "image"}, {"path", pgm.string()}});
  CHECK(ext.count() == 64);
  CHECK(ext.provenance.generator == "external_image");
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(
      runcfg::build_task({{"kind", "image"}, {"path", "x"}, {"size", 8}}),
      ContractError);
}

TEST_CASE("signal task and unknown kinds") {
  const data::Dataset ds =
      runcfg::build_task({{"kind", "signal"}, {"seed", 3}, {"count", 10}});
  CHECK(ds.count() == 10);

  try {
    runcfg::build_task({{"kind", "sudoku"}});
    CHECK(false);
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("/task/kind") != std::string::npos);
  }
  CHECK_THROWS_AS(runcfg::build_task({{"kind", "mixture"}, {"typo", 1}}),
                  ContractError);
}

TEST_CASE("output dir resolution order") {
  ::unsetenv("QRUN_OUTPUT_DIR");
  CHECK(runcfg::resolve_output_dir("explicit") == "explicit");
  CHECK(runcfg::resolve_output_dir("") == ".");
  ::setenv("QRUN_OUTPUT_DIR", "/tmp/qrun_env", 1);
  CHECK(runcfg::resolve_output_dir("") == "/tmp/qrun_env");
  CHECK(runcfg::resolve_output_dir("explicit") == "explicit");
  ::unsetenv("QRUN_OUTPUT_DIR");
}

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "qrun/datasets.hpp"
#include "qrun/training.hpp"

namespace qrun::runcfg {

// A full training-run description. Top-level keys: task, model, train, seed,
// output_dir; anything else is rejected with the key's JSON-pointer path.
struct RunConfig {
  nlohmann::json doc;    // normalized echo (defaults filled for seed)
  nlohmann::json task;   // dataset recipe, built via build_task
  nlohmann::json model;  // forwarded to model::make_model
  learn::TrainConfig train;
  std::uint64_t seed = 0;
  std::string output_dir;  // empty = not set in the config
};

RunConfig parse_run_config(const nlohmann::json& doc);

// task.kind selects the generator:
//   mixture: mixture_seed, sample_seed, count, sigma_lo, sigma_hi, k,
//            mu_lo, mu_hi
//   drqc:    seed, layers | qubits, dataset_seed, count, domain, train_band
//   image:   image + size, or path to a PGM file
//   signal:  seed, count
data::Dataset build_task(const nlohmann::json& task);

// Explicit config value, else $QRUN_OUTPUT_DIR, else ".".
std::string resolve_output_dir(const std::string& from_config);

}  // namespace qrun::runcfg

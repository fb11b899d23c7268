#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrun/io.hpp"

namespace qrun::bench {

struct BenchRow {
  std::string model;
  long param_count = 0;
  std::string metric;
  double value = 0.0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::string status = "ok";
};

struct SuiteOptions {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<std::string> only;     // restrict to these model names
  std::vector<std::string> metrics;  // restrict to these metric names
  int epochs = 0;                    // override the suite default (0 = keep)
};

// Known suites: rq1, de, ir, ablation. Rows come back sorted by
// (model, metric, seed); individual run failures land in status.
std::vector<BenchRow> run_suite(const std::string& suite,
                                const SuiteOptions& opts = {});

bool known_suite(const std::string& suite);

io::CsvTable bench_table(const std::vector<BenchRow>& rows);

// Median over the rows matching (model, metric); NaN when none match.
double median_value(const std::vector<BenchRow>& rows,
                    const std::string& model, const std::string& metric);

// Keeps big training buffers in the heap instead of bouncing through mmap.
void tune_allocator();

}  // namespace qrun::bench

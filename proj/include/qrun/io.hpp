#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qrun/autodiff.hpp"
#include "qrun/datasets.hpp"

namespace qrun::io {

inline constexpr const char* kArtifactVersion = "0.1.0";

// --- plain files ------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

// --- CSV ----------------------------------------------------------------------

// RFC-4180 body with optional '#' comment lines above and between records.
struct CsvTable {
  std::vector<std::string> comments;  // stored without the leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// 17 significant digits: enough to reproduce any double exactly.
std::string format_double(double v);

// Quotes a field iff it holds a comma, quote, or line break.
std::string csv_quote(const std::string& field);

std::string render_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

// Dataset as CSV: x0..x{d-1}, y0..y{t-1}, split; provenance in the comments.
CsvTable dataset_to_csv(const data::Dataset& ds);
data::Dataset dataset_from_csv(const CsvTable& table);

// --- PGM ----------------------------------------------------------------------

// P2 (ascii) or P5 (binary), maxval 255 only.
void write_pgm(const std::filesystem::path& path, const data::GrayImage& img,
               bool binary);
data::GrayImage read_pgm(const std::filesystem::path& path);

// --- checkpoints ---------------------------------------------------------------

struct Checkpoint {
  int schema_version = 1;
  std::string kind;
  nlohmann::json config;  // model section echoed verbatim
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string artifact_version = kArtifactVersion;
  ad::ParamSet params;
};

nlohmann::json checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// --- hashing --------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes);
// 16 lowercase hex digits over the canonical (sorted-key) JSON dump.
std::string config_hash(const nlohmann::json& config);

}  // namespace qrun::io

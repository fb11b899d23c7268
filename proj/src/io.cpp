#include "qrun/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qrun/errors.hpp"

namespace qrun::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("io: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ContractError("io: cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ContractError("io: short write to " + path.string());
}

// --- CSV ----------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string render_csv(const CsvTable& table) {
  std::string out;
  for (const std::string& c : table.comments) out += "#" + c + "\n";
  auto emit_record = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_quote(fields[i]);
    }
    out += '\n';
  };
  emit_record(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw ContractError("csv: row width " + std::to_string(row.size()) +
                          " does not match header width " +
                          std::to_string(table.header.size()));
    emit_record(row);
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool line_start = true;
  bool field_open = false;  // something was written to the current record

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
  };
  auto end_record = [&] {
    if (field_open || !field.empty() || !record.empty()) {
      end_field();
      records.push_back(record);
      record.clear();
    }
    field_open = false;
    line_start = true;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (line_start && c == '#') {
      std::size_t eol = text.find('\n', i);
      if (eol == std::string::npos) eol = text.size();
      std::size_t len = eol - i - 1;
      if (len > 0 && text[i + len] == '\r') --len;
      table.comments.push_back(text.substr(i + 1, len));
      i = eol;
      continue;
    }
    line_start = false;
    switch (c) {
      case '"':
        quoted = true;
        field_open = true;
        break;
      case ',':
        end_field();
        field_open = true;  // a delimiter implies a following (maybe empty) field
        break;
      case '\r':
        break;  // swallowed; record ends at the '\n'
      case '\n':
        end_record();
        break;
      default:
        field += c;
        field_open = true;
    }
  }
  if (quoted) throw ContractError("csv: unterminated quoted field");
  end_record();  // file may end without a newline

  if (records.empty()) throw ContractError("csv: missing header row");
  table.header = records.front();
  table.rows.assign(records.begin() + 1, records.end());
  for (const auto& row : table.rows)
    if (row.size() != table.header.size())
      throw ContractError("csv: ragged row (" + std::to_string(row.size()) +
                          " fields, header has " +
                          std::to_string(table.header.size()) + ")");
  return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  write_file(path, render_csv(table));
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_file(path));
}

// --- dataset CSV -----------------------------------------------------------------

namespace {

double parse_double(const std::string& s, const char* where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ContractError(std::string("csv: bad number in ") + where + ": \"" +
                        s + "\"");
  }
}

}  // namespace

CsvTable dataset_to_csv(const data::Dataset& ds) {
  ds.validate();
  CsvTable t;
  const data::Provenance& prov = ds.provenance;
  t.comments.push_back("generator=" + prov.generator);
  t.comments.push_back("seed=" + std::to_string(prov.seed));
  for (const auto& [k, v] : prov.params)
    t.comments.push_back("param " + k + "=" + format_double(v));
  for (const auto& [k, v] : prov.tags) t.comments.push_back("tag " + k + "=" + v);

  const int d = ds.d_in();
  const int m = ds.d_target();
  for (int j = 0; j < d; ++j) t.header.push_back("x" + std::to_string(j));
  for (int j = 0; j < m; ++j) t.header.push_back("y" + std::to_string(j));
  t.header.push_back("split");

  std::vector<std::string> split(static_cast<std::size_t>(ds.count()));
  for (int i : ds.train_idx) split[static_cast<std::size_t>(i)] = "train";
  for (int i : ds.test_idx) split[static_cast<std::size_t>(i)] = "test";

  t.rows.reserve(static_cast<std::size_t>(ds.count()));
  for (int i = 0; i < ds.count(); ++i) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(d + m + 1));
    for (int j = 0; j < d; ++j) row.push_back(format_double(ds.inputs(i, j)));
    for (int j = 0; j < m; ++j) row.push_back(format_double(ds.targets(i, j)));
    row.push_back(split[static_cast<std::size_t>(i)]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

data::Dataset dataset_from_csv(const CsvTable& t) {
  const std::size_t w = t.header.size();
  if (w < 2 || t.header.back() != "split")
    throw ContractError("csv: dataset table needs x columns and a split column");
  int d = 0;
  int m = 0;
  for (std::size_t j = 0; j + 1 < w; ++j) {
    const std::string& name = t.header[j];
    const bool is_x = name == "x" + std::to_string(d) && m == 0;
    const bool is_y = name == "y" + std::to_string(m);
    if (is_x)
      ++d;
    else if (is_y)
      ++m;
    else
      throw ContractError("csv: unexpected dataset column \"" + name + "\"");
  }
  if (d == 0) throw ContractError("csv: dataset table has no input columns");

  data::Dataset ds;
  const int n = static_cast<int>(t.rows.size());
  ds.inputs.resize(n, d);
  ds.targets.resize(n, m);
  for (int i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j)
      ds.inputs(i, j) = parse_double(row[static_cast<std::size_t>(j)], "input");
    for (int j = 0; j < m; ++j)
      ds.targets(i, j) =
          parse_double(row[static_cast<std::size_t>(d + j)], "target");
    const std::string& split = row.back();
    if (split == "train")
      ds.train_idx.push_back(i);
    else if (split == "test")
      ds.test_idx.push_back(i);
    else if (!split.empty())
      throw ContractError("csv: unknown split \"" + split + "\"");
  }

  for (const std::string& c : t.comments) {
    const std::size_t eq = c.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = c.substr(0, eq);
    const std::string value = c.substr(eq + 1);
    if (key == "generator") {
      ds.provenance.generator = value;
    } else if (key == "seed") {
      ds.provenance.seed = std::strtoull(value.c_str(), nullptr, 10);
    } else if (key.rfind("param ", 0) == 0) {
      ds.provenance.params[key.substr(6)] = parse_double(value, "provenance");
    } else if (key.rfind("tag ", 0) == 0) {
      ds.provenance.tags[key.substr(4)] = value;
    }
  }
  ds.validate();
  return ds;
}

// --- PGM ----------------------------------------------------------------------

namespace {

void check_pixels(const data::GrayImage& img) {
  if (img.width <= 0 || img.height <= 0)
    throw ContractError("pgm: empty image");
  if (img.pixels.size() !=
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height))
    throw ContractError("pgm: pixel buffer does not match dimensions");
  for (int v : img.pixels)
    if (v < 0 || v > 255)
      throw ContractError("pgm: pixel value " + std::to_string(v) +
                          " outside 0..255");
}

// Reads the next integer token, skipping whitespace and '#' comments.
int pgm_token(const std::string& s, std::size_t& pos, const char* what) {
  while (pos < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
    throw ContractError(std::string("pgm: expected ") + what);
  int v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + (s[pos] - '0');
    if (v > 1 << 20) throw ContractError("pgm: absurd header value");
    ++pos;
  }
  return v;
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const data::GrayImage& img,
               bool binary) {
  check_pixels(img);
  std::string out = binary ? "P5" : "P2";
  out += "\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
         "\n255\n";
  if (binary) {
    out.reserve(out.size() + img.pixels.size());
    for (int v : img.pixels) out += static_cast<char>(v);
  } else {
    for (int i = 0; i < img.height; ++i) {
      for (int j = 0; j < img.width; ++j) {
        out += std::to_string(img.at(j, i));
        // Keep ascii lines well under the classic 70-column limit.
        out += (j % 16 == 15 || j == img.width - 1) ? '\n' : ' ';
      }
    }
  }
  write_file(path, out);
}

data::GrayImage read_pgm(const std::filesystem::path& path) {
  const std::string s = read_file(path);
  if (s.size() < 2 || s[0] != 'P' || (s[1] != '2' && s[1] != '5'))
    throw ContractError("pgm: not a P2/P5 file");
  const bool binary = s[1] == '5';
  std::size_t pos = 2;
  data::GrayImage img;
  img.width = pgm_token(s, pos, "width");
  img.height = pgm_token(s, pos, "height");
  const int maxval = pgm_token(s, pos, "maxval");
  if (maxval != 255)
    throw ContractError("pgm: only maxval 255 is supported, got " +
                        std::to_string(maxval));
  const std::size_t count =
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.pixels.resize(count);
  if (binary) {
    ++pos;  // single whitespace after maxval
    if (s.size() - pos < count)
      throw ContractError("pgm: truncated pixel data");
    for (std::size_t i = 0; i < count; ++i)
      img.pixels[i] = static_cast<unsigned char>(s[pos + i]);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const int v = pgm_token(s, pos, "pixel");
      if (v > 255) throw ContractError("pgm: pixel value above maxval");
      img.pixels[i] = v;
    }
  }
  check_pixels(img);
  return img;
}

// --- checkpoints ---------------------------------------------------------------

nlohmann::json checkpoint_to_json(const Checkpoint& c) {
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    const ad::Param& p = c.params[i];
    if (!ad::all_finite(p.value))
      throw NumericError("checkpoint: non-finite values in " + p.name);
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index k = 0; k < p.value.size(); ++k) data.push_back(p.value[k]);
    params.push_back(
        {{"name", p.name}, {"shape", p.dims}, {"data", std::move(data)}});
  }
  return {{"schema_version", c.schema_version},
          {"artifact_version", c.artifact_version},
          {"kind", c.kind},
          {"config", c.config},
          {"seed", c.seed},
          {"config_hash", c.config_hash},
          {"params", std::move(params)}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ContractError("checkpoint: not a JSON object");
  for (const char* key : {"schema_version", "artifact_version", "kind",
                          "config", "seed", "config_hash", "params"})
    if (!j.contains(key))
      throw ContractError(std::string("checkpoint: missing key \"") + key +
                          "\"");
  Checkpoint c;
  c.schema_version = j.at("schema_version").get<int>();
  if (c.schema_version != 1)
    throw ContractError("checkpoint: unsupported schema_version " +
                        std::to_string(c.schema_version));
  c.artifact_version = j.at("artifact_version").get<std::string>();
  c.kind = j.at("kind").get<std::string>();
  c.config = j.at("config");
  c.seed = j.at("seed").get<std::uint64_t>();
  c.config_hash = j.at("config_hash").get<std::string>();
  for (const nlohmann::json& p : j.at("params")) {
    const auto name = p.at("name").get<std::string>();
    const auto dims = p.at("shape").get<std::vector<int>>();
    const auto& data = p.at("data");
    long want = 1;
    for (int d : dims) want *= d;
    if (static_cast<long>(data.size()) != want)
      throw ContractError("checkpoint: " + name + " has " +
                          std::to_string(data.size()) + " values for shape of " +
                          std::to_string(want));
    Eigen::ArrayXd value(want);
    for (long k = 0; k < want; ++k)
      value[k] = data[static_cast<std::size_t>(k)].get<double>();
    c.params.add(name, dims, std::move(value));
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  write_file(path, checkpoint_to_json(c).dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ContractError("checkpoint: " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

// --- hashing --------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(config.dump()));
  return buf;
}

}  // namespace qrun::io

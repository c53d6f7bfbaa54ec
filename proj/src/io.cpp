#include "cosmos/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cosmos/errors.hpp"

namespace cosmos {

using json = nlohmann::json;

namespace {

constexpr char kBinMagic[4] = {'C', 'S', 'M', 'S'};
constexpr std::uint8_t kBinVersion = 1;

std::string os_error() { return std::strerror(errno); }

std::uint32_t read_u32le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  out.write(reinterpret_cast<char*>(b), 4);
}

Matrix load_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + ": " + os_error());

  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t row_cols = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string cell = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                         ": bad number '" + cell + "'");
      if (!std::isfinite(v))
        throw ValidationError(path.string() + ": non-finite value at (row " +
                              std::to_string(rows) + ", col " + std::to_string(row_cols) + ")");
      values.push_back(v);
      ++row_cols;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (rows == 0) {
      cols = row_cols;
    } else if (row_cols != cols) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": expected " +
                       std::to_string(cols) + " columns, got " + std::to_string(row_cols));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string() + ": empty matrix file");

  Matrix m(rows, cols);
  m.data() = std::move(values);
  return m;
}

Matrix load_bin_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + ": " + os_error());

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kBinMagic, 4) != 0)
    throw ParseError(path.string() + ": not a CSMS matrix file");
  char version = 0;
  in.read(&version, 1);
  if (!in || static_cast<std::uint8_t>(version) != kBinVersion)
    throw ParseError(path.string() + ": unsupported CSMS version " +
                     std::to_string(static_cast<int>(version)));
  const std::uint32_t rows = read_u32le(in);
  const std::uint32_t cols = read_u32le(in);
  if (!in) throw ParseError(path.string() + ": truncated header");
  if (rows == 0 || cols == 0) throw ParseError(path.string() + ": zero dimension");

  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  std::vector<float> payload(count);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float))
    throw ParseError(path.string() + ": truncated payload, expected " +
                     std::to_string(count) + " floats");

  Matrix m(rows, cols);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = static_cast<double>(payload[i]);
    if (!std::isfinite(v))
      throw ValidationError(path.string() + ": non-finite value at (row " +
                            std::to_string(i / cols) + ", col " + std::to_string(i % cols) + ")");
    m.data()[i] = v;
  }
  return m;
}

void save_csv_matrix(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string() + ": " + os_error());
  char buf[64];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed for " + path.string() + ": " + os_error());
}

void save_bin_matrix(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string() + ": " + os_error());
  out.write(kBinMagic, 4);
  const char version = static_cast<char>(kBinVersion);
  out.write(&version, 1);
  write_u32le(out, static_cast<std::uint32_t>(m.rows()));
  write_u32le(out, static_cast<std::uint32_t>(m.cols()));
  std::vector<float> payload(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) payload[i] = static_cast<float>(m.data()[i]);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
  out.flush();
  if (!out) throw IoError("write failed for " + path.string() + ": " + os_error());
}

}  // namespace

MatrixFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? MatrixFormat::kBin : MatrixFormat::kCsv;
}

Matrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  Matrix m = format == MatrixFormat::kCsv ? load_csv_matrix(path) : load_bin_matrix(path);
  return m;
}

void save_matrix(const Matrix& m, const std::filesystem::path& path, MatrixFormat format) {
  if (!m.all_finite()) throw ValidationError("save_matrix: non-finite value in matrix");
  if (format == MatrixFormat::kCsv)
    save_csv_matrix(m, path);
  else
    save_bin_matrix(m, path);
}

std::vector<std::int32_t> load_int_column(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + ": " + os_error());
  std::vector<std::int32_t> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(line.c_str(), &end, 10);
    if (end == line.c_str() || *end != '\0' || errno == ERANGE)
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": bad integer '" + line + "'");
    out.push_back(static_cast<std::int32_t>(v));
  }
  if (out.empty()) throw ParseError(path.string() + ": empty column file");
  return out;
}

void save_int_column(const std::vector<std::int32_t>& values,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string() + ": " + os_error());
  for (std::int32_t v : values) out << v << '\n';
  out.flush();
  if (!out) throw IoError("write failed for " + path.string() + ": " + os_error());
}

bool GroupInfo::is_majority(std::int32_t g) const {
  return std::find(majority_ids.begin(), majority_ids.end(), g) != majority_ids.end();
}

std::vector<std::size_t> GroupInfo::indices_of_group(std::int32_t g) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < group_of.size(); ++i)
    if (group_of[i] == g) out.push_back(i);
  return out;
}

std::vector<std::size_t> GroupInfo::majority_pool() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < group_of.size(); ++i)
    if (is_majority(group_of[i])) out.push_back(i);
  return out;
}

std::vector<std::size_t> GroupInfo::minority_pool() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < group_of.size(); ++i)
    if (!is_majority(group_of[i])) out.push_back(i);
  return out;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + ": " + os_error());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  DatasetManifest m;
  m.base_dir = path.parent_path();
  try {
    m.split = doc.at("split").get<std::string>();
    m.classes = doc.at("classes").get<std::int32_t>();
    for (const auto& entry : doc.at("models")) {
      ModelEntry me;
      me.name = entry.at("name").get<std::string>();
      me.logits = entry.at("logits").get<std::string>();
      if (entry.contains("head")) me.head = entry.at("head").get<std::string>();
      m.models.push_back(std::move(me));
    }
    if (doc.contains("embeddings")) m.embeddings = doc.at("embeddings").get<std::string>();
    if (doc.contains("labels")) m.labels = doc.at("labels").get<std::string>();
    if (doc.contains("groups")) {
      GroupsEntry g;
      g.path = doc.at("groups").at("path").get<std::string>();
      g.majority = doc.at("groups").at("majority").get<std::vector<std::int32_t>>();
      m.groups = std::move(g);
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  json doc;
  doc["split"] = manifest.split;
  doc["classes"] = manifest.classes;
  json models = json::array();
  for (const auto& me : manifest.models) {
    json entry{{"name", me.name}, {"logits", me.logits}};
    if (me.head) entry["head"] = *me.head;
    models.push_back(entry);
  }
  doc["models"] = models;
  if (manifest.embeddings) doc["embeddings"] = *manifest.embeddings;
  if (manifest.labels) doc["labels"] = *manifest.labels;
  if (manifest.groups)
    doc["groups"] = json{{"path", manifest.groups->path}, {"majority", manifest.groups->majority}};

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string() + ": " + os_error());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string() + ": " + os_error());
}

std::size_t ValidatedDataset::model_index(const std::string& name) const {
  for (std::size_t i = 0; i < model_names.size(); ++i)
    if (model_names[i] == name) return i;
  throw ValidationError("unknown model '" + name + "'");
}

ValidatedDataset validate_manifest(const DatasetManifest& manifest) {
  std::vector<std::string> issues;
  ValidatedDataset ds;
  ds.split = manifest.split;
  ds.classes = manifest.classes;

  if (manifest.classes < 2) issues.push_back("classes must be >= 2");
  if (manifest.models.empty()) issues.push_back("manifest lists no models");

  std::optional<std::size_t> n;
  for (const auto& me : manifest.models) {
    ds.model_names.push_back(me.name);
    try {
      const auto path = manifest.resolve(me.logits);
      Matrix logits = load_matrix(path, format_for_path(path));
      if (logits.cols() != static_cast<std::size_t>(manifest.classes))
        issues.push_back("model '" + me.name + "': logits have " +
                         std::to_string(logits.cols()) + " columns, manifest declares " +
                         std::to_string(manifest.classes) + " classes");
      if (n && logits.rows() != *n)
        issues.push_back("model '" + me.name + "': " + std::to_string(logits.rows()) +
                         " rows, but model '" + manifest.models.front().name + "' has " +
                         std::to_string(*n));
      if (!n) n = logits.rows();
      ds.logits.push_back(std::move(logits));
    } catch (const Error& e) {
      issues.push_back(std::string("model '") + me.name + "': " + e.what());
      ds.logits.emplace_back();
    }
    if (me.head) {
      try {
        const auto path = manifest.resolve(*me.head);
        ds.heads.push_back(load_matrix(path, format_for_path(path)));
      } catch (const Error& e) {
        issues.push_back(std::string("model '") + me.name + "' head: " + e.what());
        ds.heads.push_back(std::nullopt);
      }
    } else {
      ds.heads.push_back(std::nullopt);
    }
  }

  if (manifest.embeddings) {
    try {
      const auto path = manifest.resolve(*manifest.embeddings);
      Matrix emb = load_matrix(path, format_for_path(path));
      if (n && emb.rows() != *n)
        issues.push_back("embeddings: " + std::to_string(emb.rows()) + " rows, expected " +
                         std::to_string(*n));
      ds.embeddings = std::move(emb);
    } catch (const Error& e) {
      issues.push_back(std::string("embeddings: ") + e.what());
    }
  }

  if (manifest.labels) {
    try {
      LabelVector labels = load_int_column(manifest.resolve(*manifest.labels));
      if (n && labels.size() != *n)
        issues.push_back("labels: " + std::to_string(labels.size()) + " rows, expected " +
                         std::to_string(*n));
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= manifest.classes) {
          issues.push_back("labels: value " + std::to_string(labels[i]) + " at row " +
                           std::to_string(i) + " outside [0, " +
                           std::to_string(manifest.classes) + ")");
          break;
        }
      }
      ds.labels = std::move(labels);
    } catch (const Error& e) {
      issues.push_back(std::string("labels: ") + e.what());
    }
  }

  if (manifest.groups) {
    try {
      GroupInfo info;
      info.group_of = load_int_column(manifest.resolve(manifest.groups->path));
      info.majority_ids = manifest.groups->majority;
      if (n && info.group_of.size() != *n)
        issues.push_back("groups: " + std::to_string(info.group_of.size()) +
                         " rows, expected " + std::to_string(*n));
      std::int32_t max_g = -1;
      for (std::size_t i = 0; i < info.group_of.size(); ++i) {
        if (info.group_of[i] < 0) {
          issues.push_back("groups: negative group id at row " + std::to_string(i));
          break;
        }
        max_g = std::max(max_g, info.group_of[i]);
      }
      info.group_count = max_g + 1;
      for (std::int32_t g : info.majority_ids)
        if (g < 0 || g >= info.group_count)
          issues.push_back("groups: majority id " + std::to_string(g) +
                           " not present in group file");
      ds.groups = std::move(info);
    } catch (const Error& e) {
      issues.push_back(std::string("groups: ") + e.what());
    }
  }

  if (!issues.empty()) {
    std::ostringstream msg;
    msg << "manifest validation failed with " << issues.size() << " issue(s):";
    for (const auto& issue : issues) msg << "\n  - " << issue;
    throw ValidationError(msg.str(), issues);
  }
  return ds;
}

}  // namespace cosmos

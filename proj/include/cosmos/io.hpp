#ifndef COSMOS_IO_HPP_
#define COSMOS_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cosmos/matrix.hpp"

namespace cosmos {

enum class MatrixFormat { kCsv, kBin };

// Picks kBin for a ".bin" extension, kCsv otherwise.
MatrixFormat format_for_path(const std::filesystem::path& path);

// CSV: UTF-8, comma separator, no header, one sample per row, '.' decimal
// point. Bin: magic "CSMS", version byte 1, u32-le rows, u32-le cols, then
// rows*cols float32-le row-major.
Matrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
void save_matrix(const Matrix& m, const std::filesystem::path& path, MatrixFormat format);

// Integer column files (labels, groups): CSV, one value per line.
std::vector<std::int32_t> load_int_column(const std::filesystem::path& path);
void save_int_column(const std::vector<std::int32_t>& values,
                     const std::filesystem::path& path);

// Per-sample group ids plus which ids count as majority groups.
struct GroupInfo {
  std::vector<std::int32_t> group_of;
  std::vector<std::int32_t> majority_ids;
  std::int32_t group_count = 0;

  bool is_majority(std::int32_t g) const;
  std::vector<std::size_t> indices_of_group(std::int32_t g) const;
  std::vector<std::size_t> majority_pool() const;
  std::vector<std::size_t> minority_pool() const;
};

struct ModelEntry {
  std::string name;
  std::string logits;               // path, relative to the manifest file
  std::optional<std::string> head;  // optional linear head, C x (d+1), last column bias
};

struct GroupsEntry {
  std::string path;
  std::vector<std::int32_t> majority;
};

// JSON document: {split, classes, models:[{name, logits, head?}],
// embeddings?, labels?, groups?:{path, majority:[ids]}}. Relative paths
// resolve against the manifest's directory.
struct DatasetManifest {
  std::string split;
  std::int32_t classes = 0;
  std::vector<ModelEntry> models;
  std::optional<std::string> embeddings;
  std::optional<std::string> labels;
  std::optional<GroupsEntry> groups;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& rel) const { return base_dir / rel; }
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Everything referenced by a manifest, loaded and cross-checked. Downstream
// code may assume all shape invariants hold.
struct ValidatedDataset {
  std::string split;
  std::int32_t classes = 0;
  std::vector<std::string> model_names;
  std::vector<Matrix> logits;                       // per model, n x C
  std::vector<std::optional<Matrix>> heads;         // per model, C x (d+1)
  std::optional<Matrix> embeddings;                 // n x d
  std::optional<LabelVector> labels;                // n
  std::optional<GroupInfo> groups;                  // n

  std::size_t size() const { return logits.empty() ? 0 : logits.front().rows(); }
  std::size_t model_count() const { return logits.size(); }
  std::size_t model_index(const std::string& name) const;
};

// Loads every referenced file and checks all cross-file invariants,
// collecting every violation before throwing ValidationError.
ValidatedDataset validate_manifest(const DatasetManifest& manifest);

}  // namespace cosmos

#endif  // COSMOS_IO_HPP_

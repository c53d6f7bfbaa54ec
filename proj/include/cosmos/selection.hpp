#ifndef COSMOS_SELECTION_HPP_
#define COSMOS_SELECTION_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cosmos/clustering.hpp"
#include "cosmos/confidence.hpp"
#include "cosmos/matrix.hpp"

namespace cosmos {

struct CalibrationProfile;

enum class SelectionMode { kCluster, kInputDep, kEnsembleLogits, kEnsembleWeights, kSingle };

const char* selection_mode_name(SelectionMode mode);

struct ClusterDecision {
  std::int32_t cluster = 0;
  std::size_t size = 0;
  std::vector<double> mean_confidence;  // per model
  std::int32_t winner = 0;
};

struct SelectionResult {
  SelectionMode mode = SelectionMode::kInputDep;
  std::size_t inputs = 0;
  std::size_t models = 0;
  std::vector<std::int32_t> chosen_model;  // per input; -1 means "ensemble"
  std::vector<std::int32_t> label;         // per input
  std::vector<std::int32_t> cluster_of;    // per input; empty for ensemble modes
  std::vector<ClusterDecision> clusters;   // cluster / input-dep modes
  std::vector<double> frequency;           // per model, sums to 1; ensemble: all mass on "ensemble"
  double ensemble_frequency = 0.0;
};

// Routes every input of a cluster to the model with the highest mean
// confidence over that cluster (ties to the smaller model index).
SelectionResult select_cluster(const ConfidenceTable& table, const ClusterAssignment& clusters);

// Per-input argmax of confidence; equivalent to singleton clusters.
SelectionResult select_input_dep(const ConfidenceTable& table);

// Averages calibrated (or raw) logits over models, then argmax per row.
SelectionResult ensemble_logits(std::span<const Matrix> logits,
                                std::span<const std::string> model_names,
                                const CalibrationProfile& profile, bool raw_logits = false);

// Averages explicit linear heads (C x (d+1), last column bias) and predicts
// argmax of the averaged head applied to the feature rows.
SelectionResult ensemble_weights(std::span<const Matrix> heads, const Matrix& features);

// A fixed base model as a degenerate selection.
SelectionResult single_model(const ConfidenceTable& table, std::size_t model);

// Models sorted by selection frequency, descending; ties to the smaller
// index. The first entry is the label-free tuning recommendation.
std::vector<std::size_t> tune_by_frequency(const SelectionResult& result);

// CSV export. Cluster and input-dep modes: index,cluster,model,label.
// Ensemble modes: index,model,label with model = "ensemble".
void write_predictions_csv(const SelectionResult& result, const std::filesystem::path& path);

nlohmann::json selection_summary_json(const SelectionResult& result,
                                      std::span<const std::string> model_names);

}  // namespace cosmos

#endif  // COSMOS_SELECTION_HPP_

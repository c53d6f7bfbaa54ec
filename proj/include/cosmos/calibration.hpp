#ifndef COSMOS_CALIBRATION_HPP_
#define COSMOS_CALIBRATION_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cosmos/matrix.hpp"

namespace cosmos {

// One confidence bin of a reliability breakdown. Bins partition [0,1] into
// equal-width intervals [(j-1)/B, j/B), the last closed at 1; empty bins are
// skipped.
struct EceBin {
  std::size_t index = 0;        // 1-based bin index
  double accuracy = 0.0;        // o_j: fraction of correct predictions in the bin
  double mean_confidence = 0.0; // e_j: mean top-class calibrated probability
  double weight = 0.0;          // P_j: fraction of all samples in the bin
  std::size_t count = 0;
};

struct EceBreakdown {
  std::vector<EceBin> bins;  // non-empty bins only
  double total = 0.0;        // sum_j P_j * |o_j - e_j|
};

// Temperature grid; defaults give the 60 values 0.25, 0.50, ..., 15.00.
struct TemperatureGrid {
  double start = 0.25;
  double stop = 15.0;
  double step = 0.25;

  std::size_t size() const;
  double at(std::size_t i) const { return start + static_cast<double>(i) * step; }
  void validate() const;

  // Parses "start:stop:step".
  static TemperatureGrid parse(const std::string& text);
};

constexpr std::size_t kDefaultEceBins = 10;

// Top-label ECE of temperature-scaled logits against labels.
EceBreakdown compute_ece(const Matrix& logits, const LabelVector& labels,
                         double temperature, std::size_t bins = kDefaultEceBins);

// Same computation from precomputed (confidence, correctness) pairs.
EceBreakdown ece_from_confidence(std::span<const double> confidence,
                                 std::span<const char> correct,
                                 std::size_t bins = kDefaultEceBins);

struct CurvePoint {
  double alpha = 0.0;
  double ece = 0.0;
};

struct GridSearchResult {
  double alpha_star = 0.0;
  double ece_star = 0.0;
  std::vector<CurvePoint> curve;  // one entry per grid point
};

// Minimizes ECE over the grid; equal ECE breaks toward the smaller alpha.
GridSearchResult grid_search_temperature(const Matrix& logits, const LabelVector& labels,
                                         const TemperatureGrid& grid,
                                         std::size_t bins = kDefaultEceBins);

struct ModelCalibration {
  std::string name;
  double alpha = 1.0;       // matched temperature used by the pipeline
  double alpha_star = 1.0;  // ECE-minimizing grid point
  double ece_star = 0.0;    // minimum ECE
  std::vector<CurvePoint> curve;
};

struct CalibrationProfile {
  double target_ece = 0.0;  // max over models of their minimum ECE
  std::vector<ModelCalibration> models;

  const ModelCalibration& find(const std::string& name) const;
  double alpha_for(const std::string& name) const { return find(name).alpha; }
};

// Cross-model ECE matching: the target is the largest per-model minimum ECE;
// each model takes the grid point whose ECE is closest to the target (ties to
// the smaller alpha). The target-attaining model thereby keeps its alpha*.
CalibrationProfile match_calibration_targets(
    std::span<const std::string> names, std::span<const GridSearchResult> results);

// JSON form: {target_ece, models:[{name, alpha, alpha_star, ece_star,
// curve:[{alpha, ece}]}]}.
void save_profile(const CalibrationProfile& profile, const std::filesystem::path& path);
CalibrationProfile load_profile(const std::filesystem::path& path);

}  // namespace cosmos

#endif  // COSMOS_CALIBRATION_HPP_

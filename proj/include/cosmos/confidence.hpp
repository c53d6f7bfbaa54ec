#ifndef COSMOS_CONFIDENCE_HPP_
#define COSMOS_CONFIDENCE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cosmos/matrix.hpp"

namespace cosmos {

struct CalibrationProfile;

// Softmax of each logits row divided by alpha, computed with max-subtraction.
// Every output row is a probability vector summing to 1 within 1e-12.
Matrix calibrated_probabilities(const Matrix& logits, double alpha);

// Per-input, per-model top-class calibrated probability and predicted label.
// Argmax ties break toward the smallest class index.
struct ConfidenceTable {
  std::size_t inputs = 0;
  std::size_t models = 0;
  std::vector<double> confidence;      // inputs x models, row-major
  std::vector<std::int32_t> label;     // inputs x models, row-major

  double conf(std::size_t x, std::size_t m) const { return confidence[x * models + m]; }
  std::int32_t pred(std::size_t x, std::size_t m) const { return label[x * models + m]; }
};

// Builds the table for all models; profile must cover every name.
ConfidenceTable confidence_table(std::span<const Matrix> logits,
                                 std::span<const std::string> model_names,
                                 const CalibrationProfile& profile);

// Shannon entropy in nats of one probability row, with 0 log 0 = 0.
// Diagnostic only; selection never uses it.
double predictive_entropy(std::span<const double> probabilities);

}  // namespace cosmos

#endif  // COSMOS_CONFIDENCE_HPP_

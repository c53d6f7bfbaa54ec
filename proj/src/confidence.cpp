#include "cosmos/confidence.hpp"

#include <algorithm>
#include <cmath>

#include "cosmos/calibration.hpp"
#include "cosmos/errors.hpp"

namespace cosmos {

Matrix calibrated_probabilities(const Matrix& logits, double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("temperature must be positive");
  Matrix probs(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto in = logits.row(r);
    auto out = probs.row(r);
    double max_scaled = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < in.size(); ++c)
      max_scaled = std::max(max_scaled, in[c] / alpha);
    double sum = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] / alpha - max_scaled);
      sum += out[c];
    }
    for (std::size_t c = 0; c < in.size(); ++c) out[c] /= sum;
  }
  return probs;
}

ConfidenceTable confidence_table(std::span<const Matrix> logits,
                                 std::span<const std::string> model_names,
                                 const CalibrationProfile& profile) {
  if (logits.size() != model_names.size())
    throw ValidationError("confidence_table: one name per logits matrix required");
  ConfidenceTable table;
  table.models = logits.size();
  table.inputs = logits.empty() ? 0 : logits.front().rows();
  table.confidence.resize(table.inputs * table.models);
  table.label.resize(table.inputs * table.models);

  for (std::size_t m = 0; m < logits.size(); ++m) {
    const double alpha = profile.alpha_for(model_names[m]);
    const Matrix probs = calibrated_probabilities(logits[m], alpha);
    for (std::size_t x = 0; x < table.inputs; ++x) {
      const auto row = probs.row(x);
      std::size_t best = 0;
      for (std::size_t c = 1; c < row.size(); ++c)
        if (row[c] > row[best]) best = c;  // ties keep the smaller class
      table.confidence[x * table.models + m] = row[best];
      table.label[x * table.models + m] = static_cast<std::int32_t>(best);
    }
  }
  return table;
}

double predictive_entropy(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

}  // namespace cosmos

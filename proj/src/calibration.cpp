#include "cosmos/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cosmos/confidence.hpp"
#include "cosmos/errors.hpp"

namespace cosmos {

using json = nlohmann::json;

std::size_t TemperatureGrid::size() const {
  // Half-step slack so 0.25:15:0.25 yields exactly 60 points despite rounding.
  return static_cast<std::size_t>(std::floor((stop - start) / step + 0.5)) + 1;
}

void TemperatureGrid::validate() const {
  if (!(start > 0.0)) throw ValidationError("temperature grid start must be positive");
  if (!(step > 0.0)) throw ValidationError("temperature grid step must be positive");
  if (stop < start) throw ValidationError("temperature grid stop must be >= start");
}

TemperatureGrid TemperatureGrid::parse(const std::string& text) {
  TemperatureGrid grid;
  const auto first = text.find(':');
  const auto second = text.find(':', first == std::string::npos ? first : first + 1);
  if (first == std::string::npos || second == std::string::npos)
    throw ValidationError("grid must be start:stop:step, got '" + text + "'");
  try {
    grid.start = std::stod(text.substr(0, first));
    grid.stop = std::stod(text.substr(first + 1, second - first - 1));
    grid.step = std::stod(text.substr(second + 1));
  } catch (const std::exception&) {
    throw ValidationError("grid must be start:stop:step, got '" + text + "'");
  }
  grid.validate();
  return grid;
}

EceBreakdown ece_from_confidence(std::span<const double> confidence,
                                 std::span<const char> correct, std::size_t bins) {
  if (bins < 1) throw ValidationError("ece: bins must be >= 1");
  if (confidence.size() != correct.size())
    throw ValidationError("ece: confidence/correctness length mismatch");
  if (confidence.empty()) throw ValidationError("ece: empty dataset");

  std::vector<double> conf_sum(bins, 0.0);
  std::vector<double> acc_sum(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  const double b = static_cast<double>(bins);
  for (std::size_t i = 0; i < confidence.size(); ++i) {
    // [(j-1)/B, j/B) with the last bin closed at 1.
    auto bin = static_cast<std::size_t>(confidence[i] * b);
    if (bin >= bins) bin = bins - 1;
    conf_sum[bin] += confidence[i];
    acc_sum[bin] += correct[i] ? 1.0 : 0.0;
    ++count[bin];
  }

  EceBreakdown out;
  const double n = static_cast<double>(confidence.size());
  for (std::size_t j = 0; j < bins; ++j) {
    if (count[j] == 0) continue;  // P(j)=0 contributes nothing
    EceBin bin;
    bin.index = j + 1;
    bin.count = count[j];
    bin.weight = static_cast<double>(count[j]) / n;
    bin.accuracy = acc_sum[j] / static_cast<double>(count[j]);
    bin.mean_confidence = conf_sum[j] / static_cast<double>(count[j]);
    out.total += bin.weight * std::abs(bin.accuracy - bin.mean_confidence);
    out.bins.push_back(bin);
  }
  return out;
}

EceBreakdown compute_ece(const Matrix& logits, const LabelVector& labels,
                         double temperature, std::size_t bins) {
  if (!(temperature > 0.0)) throw ValidationError("ece: temperature must be positive");
  if (logits.rows() != labels.size())
    throw ValidationError("ece: logits rows and label count differ");

  const Matrix probs = calibrated_probabilities(logits, temperature);
  std::vector<double> confidence(probs.rows());
  std::vector<char> correct(probs.rows());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    const auto row = probs.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[best]) best = c;
    confidence[r] = row[best];
    correct[r] = static_cast<char>(static_cast<std::int32_t>(best) == labels[r]);
  }
  return ece_from_confidence(confidence, correct, bins);
}

GridSearchResult grid_search_temperature(const Matrix& logits, const LabelVector& labels,
                                         const TemperatureGrid& grid, std::size_t bins) {
  grid.validate();
  if (logits.rows() == 0 || labels.empty()) throw ValidationError("grid search: empty dataset");

  GridSearchResult result;
  result.curve.reserve(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double alpha = grid.at(i);
    const double ece = compute_ece(logits, labels, alpha, bins).total;
    result.curve.push_back({alpha, ece});
    if (ece < result.curve[best].ece) best = i;  // strict: ties keep smaller alpha
  }
  result.alpha_star = result.curve[best].alpha;
  result.ece_star = result.curve[best].ece;
  return result;
}

CalibrationProfile match_calibration_targets(std::span<const std::string> names,
                                             std::span<const GridSearchResult> results) {
  if (names.size() != results.size() || names.empty())
    throw ValidationError("match_calibration_targets: need one result per model");

  CalibrationProfile profile;
  profile.target_ece = 0.0;
  for (const auto& r : results) profile.target_ece = std::max(profile.target_ece, r.ece_star);

  for (std::size_t m = 0; m < names.size(); ++m) {
    ModelCalibration cal;
    cal.name = names[m];
    cal.alpha_star = results[m].alpha_star;
    cal.ece_star = results[m].ece_star;
    cal.curve = results[m].curve;
    std::size_t best = 0;
    for (std::size_t i = 1; i < cal.curve.size(); ++i) {
      const double d = std::abs(cal.curve[i].ece - profile.target_ece);
      const double d_best = std::abs(cal.curve[best].ece - profile.target_ece);
      if (d < d_best) best = i;  // ties keep the smaller alpha
    }
    cal.alpha = cal.curve[best].alpha;
    profile.models.push_back(std::move(cal));
  }
  return profile;
}

const ModelCalibration& CalibrationProfile::find(const std::string& name) const {
  for (const auto& m : models)
    if (m.name == name) return m;
  throw ValidationError("model '" + name + "' missing from calibration profile");
}

void save_profile(const CalibrationProfile& profile, const std::filesystem::path& path) {
  json doc;
  doc["target_ece"] = profile.target_ece;
  json models = json::array();
  for (const auto& m : profile.models) {
    json curve = json::array();
    for (const auto& p : m.curve) curve.push_back(json{{"alpha", p.alpha}, {"ece", p.ece}});
    models.push_back(json{{"name", m.name},
                          {"alpha", m.alpha},
                          {"alpha_star", m.alpha_star},
                          {"ece_star", m.ece_star},
                          {"curve", curve}});
  }
  doc["models"] = models;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

CalibrationProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  CalibrationProfile profile;
  try {
    profile.target_ece = doc.at("target_ece").get<double>();
    for (const auto& entry : doc.at("models")) {
      ModelCalibration m;
      m.name = entry.at("name").get<std::string>();
      m.alpha = entry.at("alpha").get<double>();
      m.alpha_star = entry.at("alpha_star").get<double>();
      m.ece_star = entry.at("ece_star").get<double>();
      for (const auto& p : entry.at("curve"))
        m.curve.push_back({p.at("alpha").get<double>(), p.at("ece").get<double>()});
      profile.models.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return profile;
}

}  // namespace cosmos

#ifndef COSMOS_CLUSTERING_HPP_
#define COSMOS_CLUSTERING_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "cosmos/io.hpp"
#include "cosmos/matrix.hpp"

namespace cosmos {

struct CalibrationProfile;

enum class FeatureSource { kCalibratedLogits, kEmbeddings };

struct ClusterConfig {
  std::size_t points_per_cluster = 50;  // the paper's N
  FeatureSource source = FeatureSource::kCalibratedLogits;
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;  // max centroid movement (L2) for convergence
  std::uint64_t seed = 0;
  bool standardize = false;  // opt-in per-dimension z-scoring
  int threads = 0;           // 0 = worker_count()
};

// k = max(1, round(n/N)), rounding half away from zero.
std::size_t choose_k(std::size_t n, std::size_t points_per_cluster);

struct ClusterAssignment {
  std::size_t k = 0;
  std::vector<std::int32_t> cluster_of;  // per input, in [0, k)
  Matrix centroids;                      // k x d
  std::size_t iterations = 0;
  double wcss = 0.0;
  std::vector<double> wcss_history;  // objective after each Lloyd iteration
};

// Seeded k-means++ followed by Lloyd iterations. Empty clusters are reseeded
// to the point farthest from its assigned centroid. Cluster ids are
// relabeled by first occurrence (the cluster of input 0 is id 0), making the
// assignment canonical for a given seed and input order. Deterministic for
// any thread count.
ClusterAssignment kmeans(const Matrix& features, std::size_t k, const ClusterConfig& config);

// Calibrated-logits source: horizontal concatenation of each model's logits
// divided by its matched alpha (d = K*C). Embeddings source: the manifest's
// embedding matrix unchanged.
Matrix build_features(const ValidatedDataset& dataset, const CalibrationProfile& profile,
                      FeatureSource source);

// Chance-corrected agreement between two labelings of the same points.
double adjusted_rand_index(std::span<const std::int32_t> a, std::span<const std::int32_t> b);

}  // namespace cosmos

#endif  // COSMOS_CLUSTERING_HPP_

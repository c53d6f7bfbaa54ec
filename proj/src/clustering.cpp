#include "cosmos/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "cosmos/calibration.hpp"
#include "cosmos/errors.hpp"
#include "cosmos/parallel.hpp"
#include "cosmos/rng.hpp"

namespace cosmos {

namespace {

constexpr std::size_t kChunk = 1024;

double dist2(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

// k-means++: first center uniform, then D^2-weighted draws. Sequential by
// construction, so independent of the thread count.
std::vector<std::size_t> kmeanspp_centers(const Matrix& x, std::size_t k, SplitMix64& rng) {
  const std::size_t n = x.rows();
  std::vector<std::size_t> centers;
  centers.reserve(k);
  std::vector<char> chosen(n, 0);

  const std::size_t first = rng.below(n);
  centers.push_back(first);
  chosen[first] = 1;

  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = dist2(x.row(i), x.row(first));

  while (centers.size() < k) {
    double total = 0.0;
    for (double w : weight) total += w;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cum += weight[i];
        if (cum > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // fp round-off exhausted the scan
        for (std::size_t i = n; i-- > 0;)
          if (weight[i] > 0.0) {
            pick = i;
            break;
          }
      }
    }
    if (pick == n) {  // all remaining distances are zero (duplicate points)
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) {
          pick = i;
          break;
        }
    }
    centers.push_back(pick);
    chosen[pick] = 1;
    const auto c = x.row(pick);
    for (std::size_t i = 0; i < n; ++i) weight[i] = std::min(weight[i], dist2(x.row(i), c));
  }
  return centers;
}

bool all_rows_distinct(const Matrix& x) {
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = x.row(a), rb = x.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto ra = x.row(order[i - 1]), rb = x.row(order[i]);
    if (std::equal(ra.begin(), ra.end(), rb.begin())) return false;
  }
  return true;
}

void relabel_first_occurrence(ClusterAssignment& a, std::size_t d) {
  std::vector<std::int32_t> remap(a.k, -1);
  std::int32_t next = 0;
  for (std::int32_t& c : a.cluster_of) {
    if (remap[static_cast<std::size_t>(c)] < 0) remap[static_cast<std::size_t>(c)] = next++;
    c = remap[static_cast<std::size_t>(c)];
  }
  Matrix reordered(a.k, d);
  for (std::size_t old = 0; old < a.k; ++old) {
    const auto src = a.centroids.row(old);
    auto dst = reordered.row(static_cast<std::size_t>(remap[old]));
    std::copy(src.begin(), src.end(), dst.begin());
  }
  a.centroids = std::move(reordered);
}

}  // namespace

std::size_t choose_k(std::size_t n, std::size_t points_per_cluster) {
  if (n < 1 || points_per_cluster < 1)
    throw ValidationError("choose_k: n and N must be >= 1");
  const double ratio = static_cast<double>(n) / static_cast<double>(points_per_cluster);
  auto k = static_cast<std::size_t>(std::floor(ratio + 0.5));  // half away from zero
  if (k < 1) k = 1;
  if (k > n) k = n;
  return k;
}

ClusterAssignment kmeans(const Matrix& features, std::size_t k, const ClusterConfig& config) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (k < 1) throw ValidationError("kmeans: k must be >= 1");
  if (k > n) throw ValidationError("kmeans: k (" + std::to_string(k) + ") exceeds point count (" +
                                   std::to_string(n) + ")");
  if (!features.all_finite()) throw ValidationError("kmeans: non-finite feature value");
  if (config.max_iterations < 1) throw ValidationError("kmeans: max_iterations must be >= 1");
  if (config.tolerance < 0.0) throw ValidationError("kmeans: tolerance must be >= 0");

  Matrix work;
  const Matrix* x = &features;
  if (config.standardize) {
    work = features;
    for (std::size_t c = 0; c < d; ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < n; ++r) mean += work(r, c);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double dev = work(r, c) - mean;
        var += dev * dev;
      }
      var /= static_cast<double>(n);
      const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
      for (std::size_t r = 0; r < n; ++r) work(r, c) = (work(r, c) - mean) * scale;
    }
    x = &work;
  }

  ClusterAssignment out;
  out.k = k;
  out.cluster_of.assign(n, 0);

  // Singleton fast path: with k == n and distinct points the optimum is each
  // point alone (WCSS 0), which is also what the general path converges to.
  if (k == n && all_rows_distinct(*x)) {
    for (std::size_t i = 0; i < n; ++i) out.cluster_of[i] = static_cast<std::int32_t>(i);
    out.centroids = *x;
    out.iterations = 1;
    out.wcss = 0.0;
    out.wcss_history = {0.0};
    return out;
  }

  SplitMix64 rng(config.seed);
  const auto center_idx = kmeanspp_centers(*x, k, rng);
  Matrix centroids(k, d);
  for (std::size_t j = 0; j < k; ++j) {
    const auto src = x->row(center_idx[j]);
    std::copy(src.begin(), src.end(), centroids.row(j).begin());
  }

  const std::size_t chunks = chunk_count(n, kChunk);
  std::vector<std::int32_t>& assign = out.cluster_of;
  std::vector<double> partial_sum(chunks * k * d);
  std::vector<std::size_t> partial_count(chunks * k);
  std::vector<double> partial_wcss(chunks);
  std::vector<double> point_d2(n);

  for (std::size_t iter = 1; iter <= config.max_iterations; ++iter) {
    // Assignment: nearest centroid, ties to the smaller cluster id.
    parallel_chunks(n, kChunk, config.threads, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const auto row = x->row(i);
        double best = std::numeric_limits<double>::infinity();
        std::int32_t best_j = 0;
        for (std::size_t j = 0; j < k; ++j) {
          const double dd = dist2(row, centroids.row(j));
          if (dd < best) {
            best = dd;
            best_j = static_cast<std::int32_t>(j);
          }
        }
        assign[i] = best_j;
        point_d2[i] = best;
      }
    });

    // Reseed empty clusters to the point farthest from its centroid; the
    // centroid moves onto the point so the objective strictly decreases.
    std::vector<std::size_t> sizes(k, 0);
    for (std::int32_t a : assign) ++sizes[static_cast<std::size_t>(a)];
    for (std::size_t j = 0; j < k; ++j) {
      if (sizes[j] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(assign[i])] <= 1) continue;
        if (point_d2[i] > far_d) {
          far_d = point_d2[i];
          far = i;
        }
      }
      if (far == n) break;  // nothing movable
      --sizes[static_cast<std::size_t>(assign[far])];
      assign[far] = static_cast<std::int32_t>(j);
      sizes[j] = 1;
      const auto src = x->row(far);
      std::copy(src.begin(), src.end(), centroids.row(j).begin());
      point_d2[far] = 0.0;
    }

    // Update: per-chunk accumulators merged in chunk order, so the result is
    // independent of the thread count.
    std::fill(partial_sum.begin(), partial_sum.end(), 0.0);
    std::fill(partial_count.begin(), partial_count.end(), 0);
    parallel_chunks(n, kChunk, config.threads, [&](std::size_t c, std::size_t b, std::size_t e) {
      double* sums = partial_sum.data() + c * k * d;
      std::size_t* counts = partial_count.data() + c * k;
      for (std::size_t i = b; i < e; ++i) {
        const auto row = x->row(i);
        const auto j = static_cast<std::size_t>(assign[i]);
        double* dst = sums + j * d;
        for (std::size_t col = 0; col < d; ++col) dst[col] += row[col];
        ++counts[j];
      }
    });

    Matrix next(k, d);
    std::vector<std::size_t> total(k, 0);
    for (std::size_t c = 0; c < chunks; ++c) {
      const double* sums = partial_sum.data() + c * k * d;
      const std::size_t* counts = partial_count.data() + c * k;
      for (std::size_t j = 0; j < k; ++j) {
        auto dst = next.row(j);
        const double* src = sums + j * d;
        for (std::size_t col = 0; col < d; ++col) dst[col] += src[col];
        total[j] += counts[j];
      }
    }
    double movement = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      auto dst = next.row(j);
      for (std::size_t col = 0; col < d; ++col) dst[col] /= static_cast<double>(total[j]);
      movement = std::max(movement, std::sqrt(dist2(dst, centroids.row(j))));
    }
    centroids = std::move(next);

    // Objective after the update, merged in chunk order.
    std::fill(partial_wcss.begin(), partial_wcss.end(), 0.0);
    parallel_chunks(n, kChunk, config.threads, [&](std::size_t c, std::size_t b, std::size_t e) {
      double acc = 0.0;
      for (std::size_t i = b; i < e; ++i)
        acc += dist2(x->row(i), centroids.row(static_cast<std::size_t>(assign[i])));
      partial_wcss[c] = acc;
    });
    double wcss = 0.0;
    for (double w : partial_wcss) wcss += w;
    out.wcss_history.push_back(wcss);
    out.wcss = wcss;
    out.iterations = iter;
    if (movement <= config.tolerance) break;
  }

  out.centroids = std::move(centroids);
  relabel_first_occurrence(out, d);
  return out;
}

Matrix build_features(const ValidatedDataset& dataset, const CalibrationProfile& profile,
                      FeatureSource source) {
  if (source == FeatureSource::kEmbeddings) {
    if (!dataset.embeddings)
      throw ValidationError("embeddings requested but the manifest provides none");
    return *dataset.embeddings;
  }
  const std::size_t n = dataset.size();
  const std::size_t classes = static_cast<std::size_t>(dataset.classes);
  const std::size_t models = dataset.model_count();
  Matrix features(n, models * classes);
  for (std::size_t m = 0; m < models; ++m) {
    const double alpha = profile.alpha_for(dataset.model_names[m]);
    const Matrix& logits = dataset.logits[m];
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < classes; ++c)
        features(r, m * classes + c) = logits(r, c) / alpha;
  }
  return features;
}

double adjusted_rand_index(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  if (a.size() != b.size()) throw ValidationError("ari: labelings differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;

  std::unordered_map<std::int64_t, std::size_t> cells;
  std::unordered_map<std::int32_t, std::size_t> rows_count, cols_count;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t key =
        (static_cast<std::int64_t>(a[i]) << 32) | static_cast<std::uint32_t>(b[i]);
    ++cells[key];
    ++rows_count[a[i]];
    ++cols_count[b[i]];
  }
  auto comb2 = [](std::size_t x) {
    return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1);
  };
  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, c] : cells) sum_cells += comb2(c);
  for (const auto& [key, c] : rows_count) sum_rows += comb2(c);
  for (const auto& [key, c] : cols_count) sum_cols += comb2(c);
  const double total = comb2(n);
  const double expected = sum_rows * sum_cols / total;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) return 1.0;  // both labelings trivial
  return (sum_cells - expected) / (maximum - expected);
}

}  // namespace cosmos

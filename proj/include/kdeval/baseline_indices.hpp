#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kdeval/data_io.hpp"
#include "kdeval/partition.hpp"

namespace kdeval {

enum class Direction { higher_better, smaller_better };

struct IndexScore {
  std::string name;
  double value = 0.0;
  Direction direction = Direction::higher_better;
};

/// The index has no value for this partition (degenerate denominator, too few clusters).
class UndefinedIndex : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ClusterStats {
  std::size_t dim = 0;
  std::vector<std::size_t> sizes;
  std::vector<double> centroids;      // K * d
  std::vector<double> global_centroid;
  double within_trace = 0.0;          // tr(W_k)
  double between_trace = 0.0;         // tr(B_k)
  std::vector<double> mean_distance;  // per cluster: mean distance of members to centroid

  std::span<const double> centroid(std::size_t q) const {
    return std::span<const double>(centroids).subspan(q * dim, dim);
  }
};

inline void check_sizes(const Dataset& data, const Partition& p) {
  if (p.size() != data.size()) {
    throw std::invalid_argument("partition covers " + std::to_string(p.size()) + " points, dataset has " +
                                std::to_string(data.size()));
  }
}

inline ClusterStats cluster_stats(const Dataset& data, const Partition& partition) {
  check_sizes(data, partition);
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  const auto k = static_cast<std::size_t>(partition.num_clusters());
  ClusterStats s;
  s.dim = d;
  s.sizes = partition.cluster_sizes();
  s.centroids.assign(k * d, 0.0);
  s.global_centroid.assign(d, 0.0);
  const auto& labels = partition.labels();
  for (std::size_t i = 0; i < n; ++i) {
    const auto q = static_cast<std::size_t>(labels[i]);
    const auto p = data.point(i);
    for (std::size_t j = 0; j < d; ++j) {
      s.centroids[q * d + j] += p[j];
      s.global_centroid[j] += p[j];
    }
  }
  for (std::size_t q = 0; q < k; ++q) {
    for (std::size_t j = 0; j < d; ++j) s.centroids[q * d + j] /= static_cast<double>(s.sizes[q]);
  }
  for (auto& v : s.global_centroid) v /= static_cast<double>(n);

  s.mean_distance.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto q = static_cast<std::size_t>(labels[i]);
    const double sq = squared_distance(data.point(i), s.centroid(q));
    s.within_trace += sq;
    s.mean_distance[q] += std::sqrt(sq);
  }
  for (std::size_t q = 0; q < k; ++q) {
    s.mean_distance[q] /= static_cast<double>(s.sizes[q]);
    s.between_trace += static_cast<double>(s.sizes[q]) * squared_distance(s.centroid(q), s.global_centroid);
  }
  return s;
}

/// Calinski-Harabasz: (tr(B)/tr(W)) * (n-K)/(K-1). Higher is better.
inline IndexScore calinski_harabasz(const Dataset& data, const Partition& partition) {
  const auto n = static_cast<double>(data.size());
  const auto k = partition.num_clusters();
  if (k < 2 || static_cast<std::size_t>(k) > data.size() - 1) {
    throw UndefinedIndex("calinski_harabasz: needs 2 <= K <= n-1");
  }
  const auto s = cluster_stats(data, partition);
  if (!(s.within_trace > 0.0)) throw UndefinedIndex("calinski_harabasz: zero within-cluster dispersion");
  const double value = (s.between_trace / s.within_trace) * ((n - k) / (k - 1.0));
  return {"ch", value, Direction::higher_better};
}

/// Per-sample silhouette; samples in singleton clusters score 0.
inline std::vector<double> silhouette_samples(const Dataset& data, const Partition& partition) {
  check_sizes(data, partition);
  const std::size_t n = data.size();
  const auto k = static_cast<std::size_t>(partition.num_clusters());
  if (k < 2 || k > n - 1) throw UndefinedIndex("silhouette: needs 2 <= K <= n-1");
  const auto sizes = partition.cluster_sizes();
  const auto& labels = partition.labels();
  std::vector<double> out(n, 0.0);
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] < 2) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[static_cast<std::size_t>(labels[j])] += distance(data.point(i), data.point(j));
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < k; ++q) {
      if (q != own) b = std::min(b, sums[q] / static_cast<double>(sizes[q]));
    }
    const double denom = std::max(a, b);
    out[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return out;
}

/// Mean silhouette coefficient, in [-1, 1]. Higher is better.
inline IndexScore silhouette(const Dataset& data, const Partition& partition) {
  const auto s = silhouette_samples(data, partition);
  double total = 0.0;
  for (double v : s) total += v;
  return {"sc", total / static_cast<double>(s.size()), Direction::higher_better};
}

/// Davies-Bouldin: mean over clusters of the worst (sigma_i+sigma_j)/d(c_i,c_j). Smaller is better.
inline IndexScore davies_bouldin(const Dataset& data, const Partition& partition) {
  const auto k = static_cast<std::size_t>(partition.num_clusters());
  if (k < 2) throw UndefinedIndex("davies_bouldin: needs K >= 2");
  const auto s = cluster_stats(data, partition);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double dc = distance(s.centroid(i), s.centroid(j));
      if (!(dc > 0.0)) throw UndefinedIndex("davies_bouldin: coincident centroids");
      worst = std::max(worst, (s.mean_distance[i] + s.mean_distance[j]) / dc);
    }
    total += worst;
  }
  return {"db", total / static_cast<double>(k), Direction::smaller_better};
}

/// Adjusted Rand index from the contingency table. Two identical trivial groupings (all in
/// one cluster, or all singletons) have a zero denominator and score 1.
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < n; ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, c] : cells) index += comb2(c);
  double sum_rows = 0.0;
  for (const auto& [key, c] : rows) sum_rows += comb2(c);
  double sum_cols = 0.0;
  for (const auto& [key, c] : cols) sum_cols += comb2(c);
  const double expected = sum_rows * sum_cols / comb2(static_cast<double>(n));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

inline double adjusted_rand_index(const Partition& p, const Partition& q) {
  return adjusted_rand_index(p.labels(), q.labels());
}

}  // namespace kdeval

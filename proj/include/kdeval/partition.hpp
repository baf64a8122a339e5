#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "kdeval/data_io.hpp"
#include "kdeval/rng.hpp"
#include "kdeval/text.hpp"

namespace kdeval {

/// Hard assignment of every point to one of K non-empty clusters, stored in canonical form:
/// ids in first-occurrence order, so equal groupings compare equal.
class Partition {
 public:
  Partition() = default;

  static Partition from_labels(std::span<const int> raw, std::string source = {}) {
    if (raw.empty()) throw std::invalid_argument("partition must cover at least one point");
    Partition p;
    std::map<int, int> ids;
    p.labels_.reserve(raw.size());
    for (int r : raw) {
      auto [it, inserted] = ids.try_emplace(r, static_cast<int>(ids.size()));
      p.labels_.push_back(it->second);
    }
    p.k_ = static_cast<int>(ids.size());
    p.source_ = std::move(source);
    return p;
  }

  const std::vector<int>& labels() const { return labels_; }
  int num_clusters() const { return k_; }
  std::size_t size() const { return labels_.size(); }
  const std::string& source() const { return source_; }
  void set_source(std::string s) { source_ = std::move(s); }

  std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k_), 0);
    for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
  }

  /// Point indices per cluster, ascending.
  std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k_));
    for (std::size_t i = 0; i < labels_.size(); ++i) out[static_cast<std::size_t>(labels_[i])].push_back(i);
    return out;
  }

  /// Same grouping (source tags ignored).
  bool same_grouping(const Partition& other) const { return labels_ == other.labels_; }

 private:
  std::vector<int> labels_;
  int k_ = 0;
  std::string source_;
};

inline Partition canonicalize(std::span<const int> labels) { return Partition::from_labels(labels); }

// ---------------------------------------------------------------------------
// k-means

struct KmeansOptions {
  int restarts = 10;
  int max_iterations = 300;
};

struct KmeansFit {
  std::vector<int> labels;      // raw, 0..k-1, may leave ids unused
  std::vector<double> centers;  // k * d row-major
  double wcss = 0.0;
  int iterations = 0;
};

namespace detail {

inline std::vector<double> kmeanspp_centers(PointView pts, std::size_t k, Rng& rng) {
  const std::size_t n = pts.size();
  std::vector<double> centers;
  centers.reserve(k * pts.dim);
  const auto first = pts[rng.index(n)];
  centers.insert(centers.end(), first.begin(), first.end());
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(pts[i], first);
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cum = 0.0;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // rounding at the tail
        pick = static_cast<std::size_t>(
            std::distance(d2.begin(), std::max_element(d2.begin(), d2.end())));
      }
    } else {
      pick = rng.index(n);
    }
    const auto p = pts[pick];
    centers.insert(centers.end(), p.begin(), p.end());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(pts[i], p));
  }
  return centers;
}

/// Nearest center, lowest index on ties. Returns true if any label changed.
inline bool assign_nearest(PointView pts, std::span<const double> centers, std::size_t k,
                           std::vector<int>& labels) {
  bool changed = false;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double d = squared_distance(pts[i], centers.subspan(c * pts.dim, pts.dim));
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    if (labels[i] != best) {
      labels[i] = best;
      changed = true;
    }
  }
  return changed;
}

inline void lloyd(PointView pts, std::size_t k, int max_iterations, KmeansFit& fit) {
  const std::size_t n = pts.size();
  const std::size_t d = pts.dim;
  fit.labels.assign(n, -1);
  assign_nearest(pts, fit.centers, k, fit.labels);
  std::vector<std::size_t> counts(k);
  for (fit.iterations = 1; fit.iterations <= max_iterations; ++fit.iterations) {
    std::fill(counts.begin(), counts.end(), 0);
    std::vector<double> sums(k * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(fit.labels[i]);
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += pts[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        fit.centers[c * d + j] = sums[c * d + j] / static_cast<double>(counts[c]);
      }
    }
    // Empty clusters take the point farthest from its own center, if that point is not
    // sitting on its center already.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(fit.labels[i]);
        if (counts[own] < 2) continue;
        const double dd =
            squared_distance(pts[i], std::span<const double>(fit.centers).subspan(own * d, d));
        if (dd > far_d) {
          far_d = dd;
          far = i;
        }
      }
      if (far == n) continue;
      --counts[static_cast<std::size_t>(fit.labels[far])];
      fit.labels[far] = static_cast<int>(c);
      counts[c] = 1;
      std::copy(pts[far].begin(), pts[far].end(), fit.centers.begin() + static_cast<std::ptrdiff_t>(c * d));
    }
    if (!assign_nearest(pts, fit.centers, k, fit.labels)) break;
  }
  fit.iterations = std::min(fit.iterations, max_iterations);
  fit.wcss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(fit.labels[i]);
    fit.wcss += squared_distance(pts[i], std::span<const double>(fit.centers).subspan(c * d, d));
  }
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeds; best WCSS over the restarts.
inline KmeansFit kmeans_fit(PointView pts, std::size_t k, std::uint64_t seed,
                            const KmeansOptions& opt = {}) {
  if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
  if (k > pts.size()) {
    throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " exceeds n=" +
                                std::to_string(pts.size()));
  }
  KmeansFit best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    KmeansFit fit;
    fit.centers = detail::kmeanspp_centers(pts, k, rng);
    detail::lloyd(pts, k, opt.max_iterations, fit);
    if (fit.wcss < best.wcss) best = std::move(fit);
  }
  return best;
}

inline Partition kmeans(const Dataset& data, std::size_t k, std::uint64_t seed,
                        const KmeansOptions& opt = {}) {
  const auto fit = kmeans_fit(data.view(), k, seed, opt);
  return Partition::from_labels(fit.labels, "kmeans_k" + std::to_string(k));
}

// ---------------------------------------------------------------------------
// Gaussian mixture (full covariance, EM)

struct GmmOptions {
  int max_iterations = 200;
  double tolerance = 1e-3;       // on the mean per-point log-likelihood
  double regularization = 1e-6;  // added to every covariance diagonal
  int max_restarts = 5;
  int initializations = 10;
};

struct GmmFit {
  std::vector<int> labels;
  double mean_log_likelihood = 0.0;
  int iterations = 0;
  int restarts = 0;
};

class GmmFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct GaussianComponent {
  double weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::LLT<Eigen::MatrixXd> chol;
  double log_norm = 0.0;  // -d/2 log 2pi - 1/2 log|Sigma|
};

/// M-step from responsibilities (n x k). Returns false on a collapsed or singular component.
inline bool m_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& resp, double reg,
                   std::vector<GaussianComponent>& comps) {
  const auto n = x.rows();
  const auto d = x.cols();
  const auto k = resp.cols();
  comps.resize(static_cast<std::size_t>(k));
  for (Eigen::Index c = 0; c < k; ++c) {
    const double nk = resp.col(c).sum();
    if (!(nk > 1e-10)) return false;
    auto& comp = comps[static_cast<std::size_t>(c)];
    comp.weight = nk / static_cast<double>(n);
    comp.mean = (x.transpose() * resp.col(c)) / nk;
    const Eigen::MatrixXd centered = x.rowwise() - comp.mean.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * resp.col(c).asDiagonal() * centered) / nk;
    cov.diagonal().array() += reg;
    comp.chol.compute(cov);
    if (comp.chol.info() != Eigen::Success) return false;
    const Eigen::MatrixXd l = comp.chol.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    if (!std::isfinite(log_det)) return false;
    comp.log_norm = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
  }
  return true;
}

/// E-step: fills log-responsibilities and returns the mean log-likelihood.
inline double e_step(const Eigen::MatrixXd& x, const std::vector<GaussianComponent>& comps,
                     Eigen::MatrixXd& log_resp) {
  const auto n = x.rows();
  const auto k = static_cast<Eigen::Index>(comps.size());
  log_resp.resize(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto& comp = comps[static_cast<std::size_t>(c)];
    const Eigen::MatrixXd centered = (x.rowwise() - comp.mean.transpose()).transpose();
    const Eigen::MatrixXd z = comp.chol.matrixL().solve(centered);
    const Eigen::VectorXd maha = z.colwise().squaredNorm().transpose();
    log_resp.col(c) = (std::log(comp.weight) + comp.log_norm - 0.5 * maha.array()).matrix();
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = log_resp.row(i).maxCoeff();
    const double lse = mx + std::log((log_resp.row(i).array() - mx).exp().sum());
    log_resp.row(i).array() -= lse;
    total += lse;
  }
  return total / static_cast<double>(n);
}

}  // namespace detail

namespace detail {

/// One EM run from hard initial labels. std::nullopt when a component degenerates.
inline std::optional<GmmFit> run_em(const Eigen::MatrixXd& x, const std::vector<int>& init, std::size_t k,
                                    const GmmOptions& opt) {
  const auto n = x.rows();
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < n; ++i) resp(i, init[static_cast<std::size_t>(i)]) = 1.0;
  std::vector<GaussianComponent> comps;
  Eigen::MatrixXd log_resp;
  if (!m_step(x, resp, opt.regularization, comps)) return std::nullopt;
  double ll = e_step(x, comps, log_resp);
  int it = 1;
  for (; it <= opt.max_iterations; ++it) {
    resp = log_resp.array().exp().matrix();
    if (!m_step(x, resp, opt.regularization, comps)) return std::nullopt;
    const double next = e_step(x, comps, log_resp);
    const double change = std::abs(next - ll);
    ll = next;
    if (change < opt.tolerance) break;
  }
  if (!std::isfinite(ll)) return std::nullopt;
  GmmFit fit;
  fit.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    log_resp.row(i).maxCoeff(&best);
    fit.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  fit.mean_log_likelihood = ll;
  fit.iterations = std::min(it, opt.max_iterations);
  return fit;
}

}  // namespace detail

/// EM for a full-covariance Gaussian mixture; hard labels by maximum responsibility.
/// The first run starts from the k-means solution, the remaining `initializations - 1` runs
/// from k randomly drawn data points as centers; the highest final log-likelihood wins. A run whose covariance
/// degenerates is retried with a fresh seed, at most `max_restarts` times in total.
inline GmmFit gmm_fit(const Dataset& data, std::size_t k, std::uint64_t seed, const GmmOptions& opt = {}) {
  const std::size_t n = data.size();
  if (k == 0) throw std::invalid_argument("gmm: k must be positive");
  if (k > n) {
    throw std::invalid_argument("gmm: k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
  }
  if (k == 1) return {std::vector<int>(n, 0), 0.0, 0, 0};
  const auto d = static_cast<Eigen::Index>(data.dim());
  const Eigen::MatrixXd x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.coords().data(), static_cast<Eigen::Index>(n), d);

  std::optional<GmmFit> best;
  int restarts = 0;
  std::uint64_t stream = 0;
  for (int run = 0; run < std::max(1, opt.initializations); ++run) {
    while (true) {
      const auto run_seed = mix_seed(seed, stream++);
      std::vector<int> init;
      if (run == 0) {
        init = kmeans_fit(data.view(), k, run_seed).labels;
      } else {
        Rng rng(run_seed);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        order.resize(k);
        const auto centers = gather(data.view(), order);
        init.assign(n, -1);
        detail::assign_nearest(data.view(), centers, k, init);
      }
      auto fit = detail::run_em(x, init, k, opt);
      if (fit) {
        if (!best || fit->mean_log_likelihood > best->mean_log_likelihood) best = std::move(fit);
        break;
      }
      if (++restarts > opt.max_restarts) {
        throw GmmFailure("gmm: degenerate covariance after " + std::to_string(opt.max_restarts) +
                         " restarts (k=" + std::to_string(k) + ")");
      }
    }
  }
  best->restarts = restarts;
  return *best;
}

inline Partition gmm_em(const Dataset& data, std::size_t k, std::uint64_t seed, const GmmOptions& opt = {}) {
  const auto fit = gmm_fit(data, k, seed, opt);
  return Partition::from_labels(fit.labels, "gmm_k" + std::to_string(k));
}

// ---------------------------------------------------------------------------
// Agglomerative clustering

enum class Linkage { single, complete, average, ward };

inline const char* to_string(Linkage l) {
  switch (l) {
    case Linkage::single:
      return "single";
    case Linkage::complete:
      return "complete";
    case Linkage::average:
      return "average";
    case Linkage::ward:
      return "ward";
  }
  return "?";
}

/// Merge of cluster slot `absorbed` into slot `into` (into < absorbed).
struct Merge {
  std::size_t into = 0;
  std::size_t absorbed = 0;
  double height = 0.0;
};

struct Dendrogram {
  std::size_t n = 0;
  Linkage linkage = Linkage::ward;
  std::vector<Merge> merges;  // n - 1 merges in order
};

/// Bottom-up merging with Lance-Williams updates over a dense distance matrix. The merged
/// cluster keeps the smaller slot; ties in merge distance go to the lexicographically smallest
/// slot pair. Ward works on squared distances and reports heights as their square root.
inline Dendrogram linkage_tree(const Dataset& data, Linkage linkage) {
  const std::size_t n = data.size();
  Dendrogram tree{n, linkage, {}};
  if (n < 2) return tree;
  const bool squared = linkage == Linkage::ward;
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = squared_distance(data.point(i), data.point(j));
      dist[i * n + j] = dist[j * n + i] = squared ? s : std::sqrt(s);
    }
  }
  auto at = [&](std::size_t i, std::size_t j) -> double& { return dist[i * n + j]; };

  std::vector<bool> active(n, true);
  std::vector<double> size(n, 1.0);
  // Row cache: nearest active partner with a larger slot index.
  std::vector<std::size_t> nn(n, n);
  std::vector<double> nn_d(n, std::numeric_limits<double>::infinity());
  auto refresh = [&](std::size_t i) {
    nn[i] = n;
    nn_d[i] = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < n; ++j) {
      if (active[j] && at(i, j) < nn_d[i]) {
        nn_d[i] = at(i, j);
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  tree.merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t a = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && nn[i] < n && nn_d[i] < best) {
        best = nn_d[i];
        a = i;
      }
    }
    const std::size_t b = nn[a];
    const double dab = at(a, b);
    tree.merges.push_back({a, b, squared ? std::sqrt(dab) : dab});

    const double na = size[a];
    const double nb = size[b];
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double dak = at(a, k);
      const double dbk = at(b, k);
      double v = 0.0;
      switch (linkage) {
        case Linkage::single:
          v = std::min(dak, dbk);
          break;
        case Linkage::complete:
          v = std::max(dak, dbk);
          break;
        case Linkage::average:
          v = (na * dak + nb * dbk) / (na + nb);
          break;
        case Linkage::ward: {
          const double nk = size[k];
          v = ((na + nk) * dak + (nb + nk) * dbk - nk * dab) / (na + nb + nk);
          break;
        }
      }
      at(a, k) = at(k, a) = v;
    }
    active[b] = false;
    size[a] = na + nb;

    refresh(a);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a) continue;
      if (nn[k] == a || nn[k] == b) {
        refresh(k);
      } else if (k < a) {
        const double v = at(k, a);
        if (v < nn_d[k] || (v == nn_d[k] && a < nn[k])) {
          nn_d[k] = v;
          nn[k] = a;
        }
      }
    }
  }
  return tree;
}

/// State after the first n - k merges.
inline Partition cut_tree(const Dendrogram& tree, std::size_t k) {
  if (k == 0 || k > tree.n) throw std::invalid_argument("cut_tree: k out of range");
  std::vector<std::size_t> parent(tree.n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t m = 0; m < tree.n - k; ++m) parent[tree.merges[m].absorbed] = tree.merges[m].into;
  std::vector<int> labels(tree.n);
  for (std::size_t i = 0; i < tree.n; ++i) labels[i] = static_cast<int>(find(i));
  return Partition::from_labels(labels, std::string(to_string(tree.linkage)) + "_k" + std::to_string(k));
}

inline Partition agglomerative(const Dataset& data, std::size_t k, Linkage linkage) {
  if (k == 0 || k > data.size()) throw std::invalid_argument("agglomerative: k out of range");
  return cut_tree(linkage_tree(data, linkage), k);
}

// ---------------------------------------------------------------------------
// Candidate sets

enum class Generator { ward, complete, average, single, kmeans, gmm };

inline constexpr Generator kAllGenerators[] = {Generator::ward,   Generator::complete, Generator::average,
                                              Generator::single, Generator::kmeans,   Generator::gmm};

inline const char* to_string(Generator g) {
  switch (g) {
    case Generator::ward:
      return "ward";
    case Generator::complete:
      return "complete";
    case Generator::average:
      return "average";
    case Generator::single:
      return "single";
    case Generator::kmeans:
      return "kmeans";
    case Generator::gmm:
      return "gmm";
  }
  return "?";
}

inline Generator generator_from_string(std::string_view s) {
  for (auto g : kAllGenerators) {
    if (text::iequals(s, to_string(g))) return g;
  }
  throw std::invalid_argument("unknown generator '" + std::string(s) + "'");
}

struct CandidateSet {
  std::vector<Partition> partitions;
  std::vector<std::string> warnings;
};

/// Runs every generator for every k in [k_min, k_max], then appends the reference partition.
/// Duplicate groupings are dropped; the kept partition's source lists every producer joined
/// by '+'. Order: k ascending, generator order, reference last.
inline CandidateSet build_candidates(const Dataset& data, std::size_t k_min, std::size_t k_max,
                                     std::uint64_t seed,
                                     std::span<const Generator> generators = kAllGenerators) {
  if (k_min == 0 || k_min > k_max) throw std::invalid_argument("build_candidates: empty k range");
  if (k_max > data.size()) {
    throw std::invalid_argument("build_candidates: k_max=" + std::to_string(k_max) + " exceeds n=" +
                                std::to_string(data.size()));
  }
  CandidateSet out;
  std::map<std::vector<int>, std::size_t> seen;
  auto add = [&](Partition p) {
    auto [it, inserted] = seen.try_emplace(p.labels(), out.partitions.size());
    if (inserted) {
      out.partitions.push_back(std::move(p));
    } else {
      auto& kept = out.partitions[it->second];
      kept.set_source(kept.source() + "+" + p.source());
    }
  };

  std::map<Generator, Dendrogram> trees;
  for (auto g : generators) {
    Linkage l{};
    switch (g) {
      case Generator::ward: l = Linkage::ward; break;
      case Generator::complete: l = Linkage::complete; break;
      case Generator::average: l = Linkage::average; break;
      case Generator::single: l = Linkage::single; break;
      default: continue;
    }
    trees.emplace(g, linkage_tree(data, l));
  }

  for (std::size_t k = k_min; k <= k_max; ++k) {
    for (auto g : generators) {
      const auto tag = std::string(to_string(g)) + "_k" + std::to_string(k);
      try {
        Partition p;
        if (auto t = trees.find(g); t != trees.end()) {
          p = cut_tree(t->second, k);
        } else if (g == Generator::kmeans) {
          p = kmeans(data, k, mix_seed(seed, k));
        } else {
          p = gmm_em(data, k, mix_seed(seed, k));
        }
        p.set_source(tag);
        add(std::move(p));
      } catch (const std::exception& e) {
        out.warnings.push_back(tag + " skipped: " + e.what());
      }
    }
  }
  if (data.labels()) add(Partition::from_labels(*data.labels(), "reference"));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: one label per line; candidate directories carry a manifest.csv
// with columns file,source,k.

inline void write_partition(const std::filesystem::path& path, const Partition& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (int l : p.labels()) out << l << '\n';
}

inline Partition read_partition(const std::filesystem::path& path, std::string source = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<int> raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    const auto v = text::parse_int(t);
    if (!v) throw DataError("'" + path.string() + "': non-integer label", lineno);
    raw.push_back(static_cast<int>(*v));
  }
  if (raw.empty()) throw EmptyInputError("'" + path.string() + "' contains no labels");
  return Partition::from_labels(raw, source.empty() ? path.stem().string() : std::move(source));
}

inline void write_candidates(const std::filesystem::path& dir, std::span<const Partition> parts) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.csv", std::ios::binary);
  if (!manifest) throw DataError("cannot write manifest in '" + dir.string() + "'");
  manifest << "file,source,k\n";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "cand_%04zu.txt", i);
    write_partition(dir / name, parts[i]);
    manifest << name << ',' << parts[i].source() << ',' << parts[i].num_clusters() << '\n';
  }
}

/// Reads manifest.csv if present, otherwise every *.txt file in name order.
inline std::vector<Partition> read_candidates(const std::filesystem::path& dir) {
  std::vector<Partition> out;
  const auto manifest = dir / "manifest.csv";
  if (std::filesystem::exists(manifest)) {
    std::ifstream in(manifest);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = text::trim(line);
      if (t.empty() || lineno == 1) continue;
      const auto fields = text::split(t, ',');
      if (fields.size() < 2) throw DataError("manifest.csv: expected file,source,k", lineno);
      out.push_back(read_partition(dir / std::string(text::trim(fields[0])), std::string(text::trim(fields[1]))));
    }
  } else {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(read_partition(f));
  }
  if (out.empty()) throw EmptyInputError("no partitions found in '" + dir.string() + "'");
  return out;
}

}  // namespace kdeval

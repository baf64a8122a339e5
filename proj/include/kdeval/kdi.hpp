#pragma once

// Density-based internal validity index: each cluster gets a Gaussian KDE; the Ambiguous
// Index counts points claimed by two or more cluster territories, the Similarity Index
// measures how flat each cluster's own likelihood profile is, and the score mixes the two.
// Smaller is better; every quantity lies in [0, 1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kdeval/data_io.hpp"
#include "kdeval/density.hpp"
#include "kdeval/partition.hpp"
#include "kdeval/rng.hpp"
#include "kdeval/text.hpp"

namespace kdeval {

/// Closed interval.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

enum class AmbiguousVariant { main, v1, v2, v3 };
enum class SimilarityVariant { main, v1, v2, v3 };
/// Second ingredient of the mixture.
enum class MixTerm { similarity, boundary };
enum class DispersionCenter { mean, median };
enum class DispersionMetric { absolute, squared };

struct DispersionOptions {
  DispersionCenter center = DispersionCenter::mean;
  DispersionMetric metric = DispersionMetric::absolute;
  bool normalize = true;        // min-max normalize distances within each cluster
  bool use_likelihood = false;  // likelihoods instead of log-likelihoods
};

struct KdiParams {
  double delta = 0.5;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double rho = 0.5;
  std::size_t min_cluster_size = 3;
  AmbiguousVariant ambiguous_variant = AmbiguousVariant::main;
  SimilarityVariant similarity_variant = SimilarityVariant::main;
  MixTerm mix_with = MixTerm::similarity;
  std::size_t mc_samples = 20000;
  std::uint64_t seed = 0;
  bool compute_boundary = false;
  bool boundary_members_only = false;
  bool pair_global_normalization = false;  // A_ij over n_Omega instead of n_i + n_j
  DispersionOptions dispersion;

  void validate() const {
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("kdi: delta must lie in [0, 1]");
    for (double v : {alpha1, alpha2, beta1, beta2, rho}) {
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("kdi: alpha, beta and rho must be finite and non-negative");
      }
    }
    if (min_cluster_size == 0) throw std::invalid_argument("kdi: min_cluster_size must be positive");
    if (mc_samples == 0) throw std::invalid_argument("kdi: mc_samples must be positive");
    if (similarity_variant == SimilarityVariant::v3 && !dispersion.normalize) {
      throw std::invalid_argument("kdi: similarity v3 inside the index needs normalized dispersion");
    }
  }
};

struct ClusterDensityProfile {
  std::vector<std::size_t> members;
  DensityModel model;
  BandwidthMethod bandwidth_method = BandwidthMethod::cross_validation;
  std::vector<double> log_likelihoods;  // G_q, aligned with members
  std::vector<double> likelihoods;      // L_q = exp(G_q), clamped below at 1e-300
  double spread = 0.0;                  // population standard deviation of G_q
  Interval territory;
  Interval boundary_band;

  std::size_t size() const { return members.size(); }
  double min_log() const { return *std::min_element(log_likelihoods.begin(), log_likelihoods.end()); }
  double max_log() const { return *std::max_element(log_likelihoods.begin(), log_likelihoods.end()); }
};

/// Per-cluster profiles plus log d_q(x_i) for every point and cluster.
struct ProfileSet {
  std::size_t n = 0;
  std::vector<ClusterDensityProfile> clusters;
  std::vector<double> cross;  // n * K, row-major

  std::size_t num_clusters() const { return clusters.size(); }
  double log_density(std::size_t point, std::size_t cluster) const {
    return cross[point * clusters.size() + cluster];
  }
};

inline constexpr double kMinLikelihood = 1e-300;

/// [min G - a1*sd, max G + a2*sd]; with zero spread the margins are beta1 and beta2.
inline Interval territory_interval(double min_g, double max_g, double spread, const KdiParams& p) {
  if (spread == 0.0) return {min_g - p.beta1, max_g + p.beta2};
  return {min_g - p.alpha1 * spread, max_g + p.alpha2 * spread};
}

inline Interval boundary_interval(double min_g, double spread, double rho) {
  return {min_g, min_g + rho * spread};
}

/// Recomputes territories and boundary bands; densities are untouched.
inline void apply_intervals(ProfileSet& set, const KdiParams& params) {
  for (auto& c : set.clusters) {
    c.territory = territory_interval(c.min_log(), c.max_log(), c.spread, params);
    c.boundary_band = boundary_interval(c.min_log(), c.spread, params.rho);
  }
}

namespace detail {

inline double population_sd(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace detail

/// Fits one KDE per cluster (bandwidth per `policy`, CV folds seeded from params.seed and the
/// cluster id) and evaluates every point under every cluster's estimator.
inline ProfileSet fit_profiles(const Dataset& data, const Partition& partition, const KdiParams& params,
                               const BandwidthPolicy& policy = {}) {
  params.validate();
  if (partition.size() != data.size()) {
    throw std::invalid_argument("fit_profiles: partition covers " + std::to_string(partition.size()) +
                                " points, dataset has " + std::to_string(data.size()));
  }
  // Partition labels are canonical, so cluster order (and every sum over clusters) depends
  // only on the grouping.
  const auto groups = partition.members();
  const std::size_t k = groups.size();
  ProfileSet set;
  set.n = data.size();
  set.clusters.reserve(k);
  for (std::size_t q = 0; q < k; ++q) {
    auto coords = gather(data.view(), groups[q]);
    const PointView view{coords, data.dim()};
    const auto choice = choose_bandwidth(view, policy, mix_seed(params.seed, q));
    DensityModel model(std::move(coords), data.dim(), choice.h);
    std::vector<double> g;
    std::vector<double> l;
    g.reserve(groups[q].size());
    l.reserve(groups[q].size());
    for (auto i : groups[q]) {
      const double v = model.log_density(data.point(i));
      g.push_back(v);
      l.push_back(std::max(std::exp(v), kMinLikelihood));
    }
    const double sd = detail::population_sd(g);
    set.clusters.push_back(ClusterDensityProfile{groups[q], std::move(model), choice.method, std::move(g),
                                                 std::move(l), sd, {}, {}});
  }
  apply_intervals(set, params);

  set.cross.assign(set.n * k, 0.0);
  const auto& labels = partition.labels();
  std::vector<std::size_t> position(set.n);
  for (std::size_t q = 0; q < k; ++q) {
    for (std::size_t r = 0; r < groups[q].size(); ++r) position[groups[q][r]] = r;
  }
  for (std::size_t i = 0; i < set.n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    for (std::size_t q = 0; q < k; ++q) {
      set.cross[i * k + q] = q == own ? set.clusters[q].log_likelihoods[position[i]]
                                      : set.clusters[q].model.log_density(data.point(i));
    }
  }
  return set;
}

inline bool territory_contains(const ClusterDensityProfile& profile, std::span<const double> y) {
  return profile.territory.contains(profile.model.log_density(y));
}

// ---------------------------------------------------------------------------
// Ambiguous Index and variants

struct AmbiguousResult {
  double value = 0.0;
  std::size_t count = 0;
  std::vector<bool> flags;  // per point: inside two or more territories
};

inline AmbiguousResult ambiguous_index(const ProfileSet& set) {
  AmbiguousResult r;
  r.flags.assign(set.n, false);
  const std::size_t k = set.num_clusters();
  for (std::size_t i = 0; i < set.n; ++i) {
    std::size_t hits = 0;
    for (std::size_t q = 0; q < k && hits < 2; ++q) {
      if (set.clusters[q].territory.contains(set.log_density(i, q))) ++hits;
    }
    if (hits >= 2) {
      r.flags[i] = true;
      ++r.count;
    }
  }
  r.value = static_cast<double>(r.count) / static_cast<double>(set.n);
  return r;
}

/// A_ij for i < j, row-major over pairs (0,1), (0,2), ..., (1,2), ...: the fraction of the
/// points of C_i and C_j lying in both territories.
inline std::vector<double> pairwise_ambiguity(const ProfileSet& set, bool global_normalization = false) {
  const std::size_t k = set.num_clusters();
  std::vector<double> out;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const auto& ca = set.clusters[a];
      const auto& cb = set.clusters[b];
      std::size_t count = 0;
      for (const auto* members : {&ca.members, &cb.members}) {
        for (auto i : *members) {
          if (ca.territory.contains(set.log_density(i, a)) && cb.territory.contains(set.log_density(i, b))) {
            ++count;
          }
        }
      }
      const double denom = global_normalization ? static_cast<double>(set.n)
                                                : static_cast<double>(ca.size() + cb.size());
      out.push_back(static_cast<double>(count) / denom);
    }
  }
  return out;
}

/// Proportion of cluster pairs with A_ij > 0.
inline double ambiguous_v1(const ProfileSet& set, bool global_normalization = false) {
  const auto pairs = pairwise_ambiguity(set, global_normalization);
  if (pairs.empty()) return 0.0;
  const auto positive = std::count_if(pairs.begin(), pairs.end(), [](double a) { return a > 0.0; });
  return static_cast<double>(positive) / static_cast<double>(pairs.size());
}

/// Mean of the positive A_ij; 0 when none is positive.
inline double ambiguous_v2(const ProfileSet& set, bool global_normalization = false) {
  const auto pairs = pairwise_ambiguity(set, global_normalization);
  double sum = 0.0;
  std::size_t count = 0;
  for (double a : pairs) {
    if (a > 0.0) {
      sum += a;
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

/// Axis-aligned box sampled by the Monte Carlo area estimate: the data bounding box grown by
/// 10% of its width per side (a zero-width axis is grown by 1 unit per side).
inline std::vector<Interval> sampling_box(const Dataset& data) {
  std::vector<Interval> box(data.dim(), Interval{std::numeric_limits<double>::infinity(),
                                                 -std::numeric_limits<double>::infinity()});
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      box[k].lo = std::min(box[k].lo, p[k]);
      box[k].hi = std::max(box[k].hi, p[k]);
    }
  }
  for (auto& b : box) {
    const double w = b.hi - b.lo;
    const double pad = w > 0.0 ? 0.1 * w : 1.0;
    b.lo -= pad;
    b.hi += pad;
  }
  return box;
}

/// Disputed share of the territory area: uniform samples in the sampling box that fall in two
/// or more territories, over samples in at least one.
inline double ambiguous_v3(const Dataset& data, const ProfileSet& set, std::size_t mc_samples,
                           std::uint64_t seed) {
  const std::size_t k = set.num_clusters();
  if (k < 2) return 0.0;
  const auto box = sampling_box(data);
  Rng rng(seed);
  std::vector<double> y(data.dim());
  std::size_t in_any = 0;
  std::size_t disputed = 0;
  for (std::size_t s = 0; s < mc_samples; ++s) {
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = rng.uniform(box[j].lo, box[j].hi);
    std::size_t hits = 0;
    for (const auto& c : set.clusters) {
      if (territory_contains(c, y)) ++hits;
    }
    if (hits >= 1) ++in_any;
    if (hits >= 2) ++disputed;
  }
  return in_any == 0 ? 0.0 : static_cast<double>(disputed) / static_cast<double>(in_any);
}

// ---------------------------------------------------------------------------
// Similarity Index and variants

struct SimilarityResult {
  double value = 0.0;               // I_s (or the variant), in [0, 1]
  std::vector<double> per_cluster;  // S_q (dispersion for v3)
  double total = 0.0;               // S_Omega
};

namespace detail {

inline SimilarityResult finish_similarity(std::vector<double> per_cluster, std::size_t n_total) {
  SimilarityResult r;
  for (double s : per_cluster) r.total += s;
  r.per_cluster = std::move(per_cluster);
  r.value = 1.0 - r.total / static_cast<double>(n_total);
  return r;
}

}  // namespace detail

/// S_q = sum(L_q) / max(L_q) for clusters of at least `min_cluster_size` points, else 0;
/// I_s = 1 - sum(S_q) / n. Ratios are taken in log space so tiny likelihoods keep their
/// relative magnitudes.
inline SimilarityResult similarity_index(const ProfileSet& set, std::size_t n_total,
                                         std::size_t min_cluster_size = 3) {
  std::vector<double> s(set.num_clusters(), 0.0);
  for (std::size_t q = 0; q < s.size(); ++q) {
    const auto& c = set.clusters[q];
    if (c.size() < min_cluster_size) continue;
    const double top = c.max_log();
    for (double g : c.log_likelihoods) s[q] += std::exp(g - top);
  }
  return detail::finish_similarity(std::move(s), n_total);
}

/// Min-max normalized likelihoods per cluster; a cluster with all-equal likelihoods scores 1
/// per member.
inline SimilarityResult similarity_v1(const ProfileSet& set, std::size_t n_total,
                                      std::size_t min_cluster_size = 3) {
  std::vector<double> s(set.num_clusters(), 0.0);
  for (std::size_t q = 0; q < s.size(); ++q) {
    const auto& c = set.clusters[q];
    if (c.size() < min_cluster_size) continue;
    const double top = c.max_log();
    const double bottom = c.min_log();
    if (top == bottom) {
      s[q] = static_cast<double>(c.size());
      continue;
    }
    const double floor = std::exp(bottom - top);
    for (double g : c.log_likelihoods) s[q] += (std::exp(g - top) - floor) / (1.0 - floor);
  }
  return detail::finish_similarity(std::move(s), n_total);
}

/// Like the main index but normalized by the largest member likelihood over all clusters.
inline SimilarityResult similarity_v2(const ProfileSet& set, std::size_t n_total,
                                      std::size_t min_cluster_size = 3) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& c : set.clusters) top = std::max(top, c.max_log());
  std::vector<double> s(set.num_clusters(), 0.0);
  for (std::size_t q = 0; q < s.size(); ++q) {
    const auto& c = set.clusters[q];
    if (c.size() < min_cluster_size) continue;
    for (double g : c.log_likelihoods) s[q] += std::exp(g - top);
  }
  return detail::finish_similarity(std::move(s), n_total);
}

namespace detail {

inline double center_of(std::vector<double> v, DispersionCenter center) {
  if (center == DispersionCenter::mean) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
  }
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace detail

/// Per-cluster dispersion of G_q (or L_q) around its mean or median; the result is the
/// size-weighted mean dispersion. Bounded by 1 only when `normalize` is set.
inline SimilarityResult similarity_v3(const ProfileSet& set, std::size_t n_total,
                                      const DispersionOptions& opt = {}) {
  SimilarityResult r;
  r.per_cluster.assign(set.num_clusters(), 0.0);
  for (std::size_t q = 0; q < set.num_clusters(); ++q) {
    const auto& c = set.clusters[q];
    const auto& values = opt.use_likelihood ? c.likelihoods : c.log_likelihoods;
    const double center = detail::center_of(values, opt.center);
    std::vector<double> dist;
    dist.reserve(values.size());
    for (double v : values) {
      const double t = v - center;
      dist.push_back(opt.metric == DispersionMetric::absolute ? std::abs(t) : t * t);
    }
    if (opt.normalize) {
      const auto [lo, hi] = std::minmax_element(dist.begin(), dist.end());
      const double a = *lo;
      const double w = *hi - *lo;
      for (auto& x : dist) x = w > 0.0 ? (x - a) / w : 0.0;
    }
    double mean = 0.0;
    for (double x : dist) mean += x;
    mean /= static_cast<double>(dist.size());
    r.per_cluster[q] = mean;
    r.total += static_cast<double>(c.size()) * mean;
  }
  r.value = r.total / static_cast<double>(n_total);
  return r;
}

// ---------------------------------------------------------------------------
// Boundary Index

/// I_b = sum_i N_Bi / (K n), N_Bi counting points whose log d_i lies in
/// [min G_i, min G_i + rho * sd(G_i)]. Counts every point of the dataset unless
/// `members_only`.
inline double boundary_index(const ProfileSet& set, double rho, bool members_only = false) {
  if (!(rho >= 0.0)) throw std::invalid_argument("boundary_index: rho must be non-negative");
  const std::size_t k = set.num_clusters();
  std::size_t total = 0;
  for (std::size_t q = 0; q < k; ++q) {
    const auto& c = set.clusters[q];
    const auto band = boundary_interval(c.min_log(), c.spread, rho);
    if (members_only) {
      for (double g : c.log_likelihoods) total += band.contains(g) ? 1 : 0;
    } else {
      for (std::size_t i = 0; i < set.n; ++i) total += band.contains(set.log_density(i, q)) ? 1 : 0;
    }
  }
  return static_cast<double>(total) / (static_cast<double>(k) * static_cast<double>(set.n));
}

// ---------------------------------------------------------------------------
// The mixed index

struct KdiScore {
  double I = 0.0;
  double I_a = 0.0;
  double I_s = 0.0;
  std::optional<double> I_b;
  std::size_t ambiguous_count = 0;  // a_Omega under the main definition
  std::vector<double> per_cluster_S;
  double S_omega = 0.0;
  std::vector<double> bandwidths;  // per cluster, canonical order
};

/// Scores already-fitted profiles; territories must match `params` (see apply_intervals).
inline KdiScore score_profiles(const Dataset& data, const ProfileSet& set, const KdiParams& params) {
  KdiScore out;
  const auto amb = ambiguous_index(set);
  out.ambiguous_count = amb.count;
  switch (params.ambiguous_variant) {
    case AmbiguousVariant::main:
      out.I_a = amb.value;
      break;
    case AmbiguousVariant::v1:
      out.I_a = ambiguous_v1(set, params.pair_global_normalization);
      break;
    case AmbiguousVariant::v2:
      out.I_a = ambiguous_v2(set, params.pair_global_normalization);
      break;
    case AmbiguousVariant::v3:
      out.I_a = ambiguous_v3(data, set, params.mc_samples, mix_seed(params.seed, 0x3c3c));
      break;
  }
  SimilarityResult sim;
  switch (params.similarity_variant) {
    case SimilarityVariant::main:
      sim = similarity_index(set, set.n, params.min_cluster_size);
      break;
    case SimilarityVariant::v1:
      sim = similarity_v1(set, set.n, params.min_cluster_size);
      break;
    case SimilarityVariant::v2:
      sim = similarity_v2(set, set.n, params.min_cluster_size);
      break;
    case SimilarityVariant::v3:
      sim = similarity_v3(set, set.n, params.dispersion);
      break;
  }
  out.I_s = sim.value;
  out.per_cluster_S = std::move(sim.per_cluster);
  out.S_omega = sim.total;
  if (params.compute_boundary || params.mix_with == MixTerm::boundary) {
    out.I_b = boundary_index(set, params.rho, params.boundary_members_only);
  }
  const double second = params.mix_with == MixTerm::similarity ? out.I_s : *out.I_b;
  out.I = params.delta * out.I_a + (1.0 - params.delta) * second;
  for (const auto& c : set.clusters) out.bandwidths.push_back(c.model.bandwidth());
  return out;
}

inline KdiScore kdi_index(const Dataset& data, const Partition& partition, const KdiParams& params,
                          const BandwidthPolicy& policy = {}) {
  return score_profiles(data, fit_profiles(data, partition, params, policy), params);
}

// ---------------------------------------------------------------------------
// Names used by config files and reports.

inline const char* to_string(AmbiguousVariant v) {
  switch (v) {
    case AmbiguousVariant::main: return "main";
    case AmbiguousVariant::v1: return "v1";
    case AmbiguousVariant::v2: return "v2";
    case AmbiguousVariant::v3: return "v3";
  }
  return "?";
}

inline const char* to_string(SimilarityVariant v) {
  switch (v) {
    case SimilarityVariant::main: return "main";
    case SimilarityVariant::v1: return "v1";
    case SimilarityVariant::v2: return "v2";
    case SimilarityVariant::v3: return "v3";
  }
  return "?";
}

inline AmbiguousVariant ambiguous_variant_from_string(std::string_view s) {
  for (auto v : {AmbiguousVariant::main, AmbiguousVariant::v1, AmbiguousVariant::v2, AmbiguousVariant::v3}) {
    if (text::iequals(s, to_string(v))) return v;
  }
  throw std::invalid_argument("unknown ambiguous variant '" + std::string(s) + "'");
}

inline SimilarityVariant similarity_variant_from_string(std::string_view s) {
  for (auto v : {SimilarityVariant::main, SimilarityVariant::v1, SimilarityVariant::v2, SimilarityVariant::v3}) {
    if (text::iequals(s, to_string(v))) return v;
  }
  throw std::invalid_argument("unknown similarity variant '" + std::string(s) + "'");
}

}  // namespace kdeval

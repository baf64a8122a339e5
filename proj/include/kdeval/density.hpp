#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdeval/data_io.hpp"
#include "kdeval/rng.hpp"

namespace kdeval {

namespace detail {

/// Streaming log-sum-exp accumulator.
struct LogSumExp {
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;

  void add(double e) {
    if (e > max) {
      sum = sum * std::exp(max - e) + 1.0;
      max = e;
    } else {
      sum += std::exp(e - max);
    }
  }
  double value() const { return max + std::log(sum); }
};

inline double log_kernel_norm(std::size_t m, std::size_t dim, double h) {
  const double d = static_cast<double>(dim);
  return -std::log(static_cast<double>(m)) - 0.5 * d * std::log(2.0 * std::numbers::pi) -
         d * std::log(h);
}

}  // namespace detail

/// Gaussian kernel density estimate over a fixed set of training points.
class DensityModel {
 public:
  DensityModel(std::vector<double> points, std::size_t dim, double bandwidth)
      : points_(std::move(points)), dim_(dim), h_(bandwidth) {
    if (dim_ == 0 || points_.empty() || points_.size() % dim_ != 0) {
      throw std::invalid_argument("DensityModel: need at least one point of positive dimension");
    }
    if (!(h_ > 0.0) || !std::isfinite(h_)) {
      throw std::invalid_argument("DensityModel: bandwidth must be positive and finite");
    }
    log_norm_ = detail::log_kernel_norm(size(), dim_, h_);
    inv_two_h2_ = 1.0 / (2.0 * h_ * h_);
  }

  std::size_t size() const { return points_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  double bandwidth() const { return h_; }
  PointView points() const { return {points_, dim_}; }

  /// log f(x), evaluated with log-sum-exp so distant queries stay finite.
  double log_density(std::span<const double> x) const {
    if (x.size() != dim_) throw std::invalid_argument("log_density: dimension mismatch");
    detail::LogSumExp acc;
    const auto pts = points();
    for (std::size_t i = 0; i < size(); ++i) acc.add(-squared_distance(x, pts[i]) * inv_two_h2_);
    return acc.value() + log_norm_;
  }

  double density(std::span<const double> x) const { return std::exp(log_density(x)); }

 private:
  std::vector<double> points_;
  std::size_t dim_;
  double h_;
  double log_norm_ = 0.0;
  double inv_two_h2_ = 0.0;
};

inline DensityModel fit_kde(PointView points, double h) {
  if (points.size() == 0) throw std::invalid_argument("fit_kde: no points");
  return DensityModel(std::vector<double>(points.coords.begin(), points.coords.end()), points.dim, h);
}

inline double log_density(const DensityModel& model, std::span<const double> x) {
  return model.log_density(x);
}

/// Candidate bandwidths plus the fold layout for cross-validation.
struct BandwidthSearchSpec {
  std::vector<double> grid;
  std::size_t folds = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (grid.empty()) throw std::invalid_argument("bandwidth grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
        throw std::invalid_argument("bandwidth grid values must be positive and finite");
      }
      if (i > 0 && !(grid[i] > grid[i - 1])) {
        throw std::invalid_argument("bandwidth grid must be strictly increasing");
      }
    }
    if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  }
};

/// Thrown when a sample is too small for the requested number of folds.
class TooFewPointsForFolds : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// `count` log-spaced values over [lo, hi].
inline std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  if (count == 1) return {lo};
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::exp(a + step * static_cast<double>(i)));
  return out;
}

/// Median pairwise distance, over at most `max_points` evenly strided points.
inline double median_pairwise_distance(PointView points, std::size_t max_points = 500) {
  const std::size_t m = points.size();
  const std::size_t stride = m > max_points ? (m + max_points - 1) / max_points : 1;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < m; i += stride) rows.push_back(i);
  std::vector<double> dists;
  dists.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      dists.push_back(distance(points[rows[a]], points[rows[b]]));
    }
  }
  if (dists.empty()) return 0.0;
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  if (dists.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(dists.begin(), mid);
  return 0.5 * (lower + upper);
}

/// Scale-relative grid: `count` log-spaced values over [lo_factor*s, hi_factor*s], s the median
/// pairwise distance. Empty when the points have no spread.
inline std::vector<double> default_bandwidth_grid(PointView points, std::size_t count = 20,
                                                  double lo_factor = 0.01, double hi_factor = 10.0) {
  const double s = median_pairwise_distance(points);
  if (!(s > 0.0)) return {};
  return log_spaced(lo_factor * s, hi_factor * s, count);
}

inline bool all_coincident(PointView points) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (squared_distance(points[0], points[i]) != 0.0) return false;
  }
  return true;
}

/// Held-out objective: sum over all points of log f_{-fold}(x), divided by the fold count,
/// for every grid value. Exposed for diagnostics and tests.
inline std::vector<double> cv_scores(PointView points, const BandwidthSearchSpec& spec) {
  constexpr double kUnderflowPenalty = -1e10;
  const std::size_t m = points.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);
  std::vector<std::size_t> fold_of(m);
  for (std::size_t pos = 0; pos < m; ++pos) fold_of[order[pos]] = pos % spec.folds;

  std::vector<std::size_t> fold_size(spec.folds, 0);
  for (auto f : fold_of) ++fold_size[f];

  std::vector<double> inv_two_h2(spec.grid.size());
  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    inv_two_h2[g] = 1.0 / (2.0 * spec.grid[g] * spec.grid[g]);
  }

  std::vector<double> totals(spec.grid.size(), 0.0);
  std::vector<double> sq;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t f = fold_of[i];
    const std::size_t train = m - fold_size[f];
    sq.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (fold_of[j] != f) sq.push_back(squared_distance(points[i], points[j]));
    }
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
      detail::LogSumExp acc;
      for (double s : sq) acc.add(-s * inv_two_h2[g]);
      double v = acc.value() + detail::log_kernel_norm(train, points.dim, spec.grid[g]);
      if (!std::isfinite(v)) v = kUnderflowPenalty;
      totals[g] += v;
    }
  }
  for (auto& t : totals) t /= static_cast<double>(spec.folds);
  return totals;
}

/// Grid value maximizing the mean held-out log-likelihood; ties go to the larger bandwidth.
/// Coincident points make the objective unbounded as h -> 0, so they get the largest value.
inline double select_bandwidth(PointView points, const BandwidthSearchSpec& spec) {
  spec.validate();
  if (spec.grid.size() == 1) return spec.grid.front();
  if (points.size() < spec.folds) {
    throw TooFewPointsForFolds("select_bandwidth: " + std::to_string(points.size()) +
                               " points for " + std::to_string(spec.folds) + " folds");
  }
  if (all_coincident(points)) return spec.grid.back();
  const auto scores = cv_scores(points, spec);
  std::size_t best = 0;
  for (std::size_t g = 1; g < scores.size(); ++g) {
    if (scores[g] >= scores[best]) best = g;
  }
  return spec.grid[best];
}

/// Scott-style rule with the mean per-dimension sample standard deviation; 1.0 for no spread.
inline double fallback_bandwidth(PointView points) {
  const std::size_t m = points.size();
  if (m == 0) throw std::invalid_argument("fallback_bandwidth: no points");
  if (m == 1) return 1.0;
  double sigma = 0.0;
  for (std::size_t k = 0; k < points.dim; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += points[i][k];
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double t = points[i][k] - mean;
      ss += t * t;
    }
    sigma += std::sqrt(ss / static_cast<double>(m - 1));
  }
  sigma /= static_cast<double>(points.dim);
  if (!(sigma > 0.0)) return 1.0;
  return sigma * std::pow(static_cast<double>(m), -1.0 / (static_cast<double>(points.dim) + 4.0));
}

enum class BandwidthMethod { cross_validation, fallback, fixed };

inline const char* to_string(BandwidthMethod m) {
  switch (m) {
    case BandwidthMethod::cross_validation:
      return "cv";
    case BandwidthMethod::fallback:
      return "fallback";
    case BandwidthMethod::fixed:
      return "fixed";
  }
  return "?";
}

/// How per-cluster bandwidths are chosen.
struct BandwidthPolicy {
  std::size_t folds = 5;
  std::size_t grid_size = 20;
  double grid_lo = 0.01;  // multiples of the median pairwise distance
  double grid_hi = 10.0;
  std::vector<double> grid;             // explicit absolute grid; overrides the scale-relative one
  std::optional<double> fixed;          // skip selection entirely
};

struct BandwidthChoice {
  double h = 1.0;
  BandwidthMethod method = BandwidthMethod::fallback;
};

/// Per-cluster bandwidth: fixed if set, otherwise CV over the grid, falling back to the
/// rule of thumb when the cluster is smaller than the fold count or has no spread.
inline BandwidthChoice choose_bandwidth(PointView points, const BandwidthPolicy& policy,
                                        std::uint64_t seed) {
  if (policy.fixed) return {*policy.fixed, BandwidthMethod::fixed};
  if (points.size() < policy.folds) return {fallback_bandwidth(points), BandwidthMethod::fallback};
  BandwidthSearchSpec spec;
  spec.folds = policy.folds;
  spec.seed = seed;
  spec.grid = policy.grid.empty()
                  ? default_bandwidth_grid(points, policy.grid_size, policy.grid_lo, policy.grid_hi)
                  : policy.grid;
  if (spec.grid.empty()) return {fallback_bandwidth(points), BandwidthMethod::fallback};
  return {select_bandwidth(points, spec), BandwidthMethod::cross_validation};
}

}  // namespace kdeval

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "kdeval/density.hpp"
#include "oracles.hpp"

using namespace kdeval;

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

std::vector<double> sample_normal_1d(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST(Kde, SinglePointAtCenter) {
  const auto m = fit_kde({std::vector<double>{0.0}, 1}, 1.0);
  const double x[] = {0.0};
  EXPECT_NEAR(m.density(x), 0.398942280401, 1e-12);
  EXPECT_NEAR(log_density(m, x), -0.918938533205, 1e-12);
}

TEST(Kde, TwoSymmetricPoints) {
  const std::vector<double> pts{-1.0, 1.0};
  const auto m = fit_kde({pts, 1}, 1.0);
  const double x[] = {0.0};
  EXPECT_NEAR(m.density(x), std::exp(-0.5) * kInvSqrt2Pi, 1e-15);
}

TEST(Kde, MatchesNaiveSum) {
  Rng rng(17);
  const auto c = fixtures::random_coords(rng, 50, 2);
  const auto m = fit_kde({c, 2}, 0.7);
  oracle::Points pts;
  for (std::size_t i = 0; i < 50; ++i) pts.push_back({c[2 * i], c[2 * i + 1]});
  for (int q = 0; q < 10; ++q) {
    const std::vector<double> x{rng.normal() * 2, rng.normal() * 2};
    const double expect = static_cast<double>(oracle::kde(pts, 0.7, x));
    EXPECT_NEAR(m.density(x), expect, 1e-9 * expect);
  }
}

TEST(Kde, FarQueryStaysFinite) {
  const auto m = fit_kde({std::vector<double>{0.0}, 1}, 1.0);
  const double x[] = {100.0};
  const double v = m.log_density(x);
  ASSERT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, -0.918938533205 - 5000.0, 1e-9);
}

TEST(Kde, ExpOfLogEqualsDirectDensity) {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 1 + rng.index(3);
    const std::size_t m = 1 + rng.index(40);
    const auto c = fixtures::random_coords(rng, m, d);
    const double h = rng.uniform(0.2, 2.0);
    const auto model = fit_kde({c, d}, h);
    oracle::Points pts;
    for (std::size_t i = 0; i < m; ++i) pts.emplace_back(c.begin() + i * d, c.begin() + (i + 1) * d);
    std::vector<double> x(d);
    for (auto& v : x) v = rng.normal() * 3;
    const double direct = static_cast<double>(oracle::kde(pts, h, x));
    if (direct > 1e-300) {
      EXPECT_NEAR(std::exp(model.log_density(x)), direct, 1e-12 * direct);
    }
  }
}

TEST(Kde, InvalidInputs) {
  EXPECT_THROW(fit_kde({std::vector<double>{}, 1}, 1.0), std::invalid_argument);
  EXPECT_THROW(fit_kde({std::vector<double>{0.0}, 1}, 0.0), std::invalid_argument);
  EXPECT_THROW(fit_kde({std::vector<double>{0.0}, 1}, -1.0), std::invalid_argument);
  const auto m = fit_kde({std::vector<double>{0.0, 0.0}, 2}, 1.0);
  const double x[] = {0.0};
  EXPECT_THROW(m.log_density(x), std::invalid_argument);
}

TEST(Kde, IntegratesToOneIn1d) {
  const auto pts = sample_normal_1d(9, 25);
  const double h = 0.4;
  const auto m = fit_kde({pts, 1}, h);
  const double lo = *std::min_element(pts.begin(), pts.end()) - 10 * h;
  const double hi = *std::max_element(pts.begin(), pts.end()) + 10 * h;
  const int steps = 20000;
  const double dx = (hi - lo) / steps;
  double total = 0;
  for (int i = 0; i <= steps; ++i) {
    const double x[] = {lo + i * dx};
    total += (i == 0 || i == steps ? 0.5 : 1.0) * m.density(x);
  }
  EXPECT_NEAR(total * dx, 1.0, 1e-3);
}

TEST(Kde, TranslationEquivariant) {
  Rng rng(21);
  auto c = fixtures::random_coords(rng, 30, 3);
  const auto a = fit_kde({c, 3}, 0.8);
  const std::vector<double> shift{5.5, -3.25, 17.0};
  std::vector<double> x{0.3, 0.1, -0.4};
  const double before = a.log_density(x);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += shift[i % 3];
  for (std::size_t k = 0; k < 3; ++k) x[k] += shift[k];
  EXPECT_NEAR(fit_kde({c, 3}, 0.8).log_density(x), before, 1e-12);
}

TEST(Kde, DecaysAlongARay) {
  Rng rng(2);
  const auto c = fixtures::random_coords(rng, 40, 2);
  const auto m = fit_kde({c, 2}, 0.5);
  double prev = std::numeric_limits<double>::infinity();
  for (double r = 5.0; r < 200.0; r += 5.0) {
    const double x[] = {r * 0.6, r * 0.8};
    const double v = m.log_density(x);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Bandwidth, CvRejectsExtremes) {
  const std::vector<double> grid{0.01, 0.1, 0.3, 1.0, 10.0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = sample_normal_1d(100 + seed, 200);
    BandwidthSearchSpec spec{grid, 5, seed};
    const double h = select_bandwidth({x, 1}, spec);
    EXPECT_TRUE(h == 0.1 || h == 0.3 || h == 1.0) << "seed " << seed << " picked " << h;
  }
}

TEST(Bandwidth, SingleElementGrid) {
  const std::vector<double> x{1.0, 2.0};
  EXPECT_EQ(select_bandwidth({x, 1}, {{0.7}, 5, 0}), 0.7);
}

TEST(Bandwidth, CoincidentPointsPickLargestGridValue) {
  const std::vector<double> x(10, 3.0);
  EXPECT_EQ(select_bandwidth({x, 1}, {{0.1, 0.5, 2.0}, 5, 1}), 2.0);
}

TEST(Bandwidth, DeterministicGivenSeed) {
  const auto x = sample_normal_1d(77, 60);
  const auto grid = log_spaced(0.05, 5.0, 20);
  EXPECT_EQ(cv_scores({x, 1}, {grid, 5, 4}), cv_scores({x, 1}, {grid, 5, 4}));
}

TEST(Bandwidth, PicksLastMaximumOfCvScores) {
  const auto x = sample_normal_1d(31, 40);
  const BandwidthSearchSpec spec{log_spaced(0.05, 5.0, 12), 5, 2};
  const auto scores = cv_scores({x, 1}, spec);
  std::size_t best = 0;
  for (std::size_t g = 0; g < scores.size(); ++g)
    if (!(scores[g] < scores[best])) best = g;
  EXPECT_EQ(select_bandwidth({x, 1}, spec), spec.grid[best]);
}

TEST(Bandwidth, TooFewPointsForFolds) {
  const std::vector<double> x{1.0, 2.0, 3.0};
  EXPECT_THROW(select_bandwidth({x, 1}, {{0.1, 1.0}, 5, 0}), TooFewPointsForFolds);
}

TEST(Bandwidth, SpecValidation) {
  const std::vector<double> x(20, 1.0);
  EXPECT_THROW(select_bandwidth({x, 1}, {{}, 5, 0}), std::invalid_argument);
  EXPECT_THROW(select_bandwidth({x, 1}, {{1.0, 0.5}, 5, 0}), std::invalid_argument);
  EXPECT_THROW(select_bandwidth({x, 1}, {{-1.0, 0.5}, 5, 0}), std::invalid_argument);
  EXPECT_THROW(select_bandwidth({x, 1}, {{0.5, 1.0}, 1, 0}), std::invalid_argument);
}

TEST(Bandwidth, FallbackRule) {
  EXPECT_EQ(fallback_bandwidth({std::vector<double>{4.0, 2.0}, 2}), 1.0);
  EXPECT_EQ(fallback_bandwidth({std::vector<double>{4.0, 2.0, 4.0, 2.0}, 2}), 1.0);
  Rng rng(8);
  const auto c = fixtures::random_coords(rng, 100, 2);
  double sd = 0;
  for (int k = 0; k < 2; ++k) {
    double mean = 0, ss = 0;
    for (int i = 0; i < 100; ++i) mean += c[2 * i + k];
    mean /= 100;
    for (int i = 0; i < 100; ++i) ss += (c[2 * i + k] - mean) * (c[2 * i + k] - mean);
    sd += std::sqrt(ss / 99) / 2;
  }
  const double h = fallback_bandwidth({c, 2});
  EXPECT_NEAR(h, sd * std::pow(100.0, -1.0 / 6.0), 1e-12);
  EXPECT_NEAR(h, 0.464, 0.07);
}

TEST(Bandwidth, DefaultGridIsScaleRelative) {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const double s = median_pairwise_distance({x, 1});
  EXPECT_EQ(s, 1.5);  // distances 1,1,1,2,2,3
  const auto g = default_bandwidth_grid({x, 1});
  ASSERT_EQ(g.size(), 20u);
  EXPECT_NEAR(g.front(), 0.015, 1e-15);
  EXPECT_NEAR(g.back(), 15.0, 1e-12);
  EXPECT_TRUE(default_bandwidth_grid({std::vector<double>(5, 2.0), 1}).empty());
}

TEST(Bandwidth, PolicyRouting) {
  const std::vector<double> small{1.0, 2.0, 3.0};
  EXPECT_EQ(choose_bandwidth({small, 1}, {}, 0).method, BandwidthMethod::fallback);
  BandwidthPolicy fixed;
  fixed.fixed = 0.25;
  const auto f = choose_bandwidth({small, 1}, fixed, 0);
  EXPECT_EQ(f.method, BandwidthMethod::fixed);
  EXPECT_EQ(f.h, 0.25);
  const auto x = sample_normal_1d(1, 50);
  EXPECT_EQ(choose_bandwidth({x, 1}, {}, 0).method, BandwidthMethod::cross_validation);
  EXPECT_EQ(choose_bandwidth({std::vector<double>(8, 1.0), 1}, {}, 0).method, BandwidthMethod::fallback);
}

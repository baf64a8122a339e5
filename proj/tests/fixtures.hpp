#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "kdeval/kdeval.hpp"

namespace fixtures {

using namespace kdeval;

// n=400: four unit-variance blobs on a 10-unit square.
inline Dataset four_blobs() {
  return make_blobs(100, {{0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}, {10.0, 10.0}}, 1.0, 7, "four_blobs");
}

// Concentric rings, radii 1 and 3, radial noise 0.1, 200 points each.
inline Dataset two_rings() {
  Rng rng(11);
  std::vector<double> xy;
  std::vector<int> lab;
  const double radii[2] = {1.0, 3.0};
  for (int r = 0; r < 2; ++r) {
    for (int i = 0; i < 200; ++i) {
      const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double rr = radii[r] + 0.1 * rng.normal();
      xy.push_back(rr * std::cos(t));
      xy.push_back(rr * std::sin(t));
      lab.push_back(r);
    }
  }
  return Dataset("two_rings", 2, std::move(xy), std::move(lab));
}

// 1-D points {0,1,10,11} split as {0,1},{10,11}.
inline Dataset four_points() { return Dataset("four_points", 1, {0.0, 1.0, 10.0, 11.0}, std::vector<int>{0, 0, 1, 1}); }

inline std::vector<double> random_coords(Rng& rng, std::size_t n, std::size_t d, double scale = 1.0) {
  std::vector<double> c(n * d);
  for (auto& v : c) v = scale * rng.normal();
  return c;
}

// Gaussian clusters with random centers, so partitions are neither trivial nor degenerate.
inline Dataset random_clustered(Rng& rng, std::size_t n, std::size_t d, std::size_t k, const std::string& id = "rand") {
  std::vector<double> centers(k * d);
  for (auto& v : centers) v = rng.uniform(-6.0, 6.0);
  std::vector<double> c;
  std::vector<int> lab;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t q = i % k;
    for (std::size_t j = 0; j < d; ++j) c.push_back(centers[q * d + j] + rng.normal());
    lab.push_back(static_cast<int>(q));
  }
  return Dataset(id, d, std::move(c), std::move(lab));
}

inline std::vector<int> random_labels(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<int> l(n);
  for (std::size_t i = 0; i < n; ++i) l[i] = static_cast<int>(i < k ? i : rng.index(k));
  rng.shuffle(l);
  return l;
}

}  // namespace fixtures

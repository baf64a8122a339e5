// One PASS/FAIL line per acceptance criterion; exit status is nonzero if any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "kdeval/kdeval.hpp"
#include "oracles.hpp"

using namespace kdeval;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<double> bandwidths(const ProfileSet& s) {
  std::vector<double> h;
  for (const auto& c : s.clusters) h.push_back(c.model.bandwidth());
  return h;
}

// 1. KDE against the naive sum
void kde_oracle() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 1 + rng.index(200);
    const std::size_t d = 1 + rng.index(3);
    const auto c = fixtures::random_coords(rng, m, d, 2.0);
    const double h = rng.uniform(0.1, 3.0);
    const auto model = fit_kde({c, d}, h);
    oracle::Points pts;
    for (std::size_t i = 0; i < m; ++i) pts.emplace_back(c.begin() + i * d, c.begin() + (i + 1) * d);
    std::vector<double> x(d);
    for (auto& v : x) v = 3.0 * rng.normal();
    worst = std::max(worst, std::abs(model.log_density(x) - oracle::log_kde(pts, h, x)));
  }
  Rng g(5);
  std::vector<double> pts(40);
  for (auto& v : pts) v = g.normal();
  const double h = 0.3;
  const auto m = fit_kde({pts, 1}, h);
  const double lo = *std::min_element(pts.begin(), pts.end()) - 12 * h;
  const double hi = *std::max_element(pts.begin(), pts.end()) + 12 * h;
  const int steps = 40000;
  const double dx = (hi - lo) / steps;
  double integral = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double x[] = {lo + i * dx};
    integral += (i == 0 || i == steps ? 0.5 : 1.0) * m.density(x);
  }
  integral *= dx;
  const double secs = seconds_since(t0);
  report(1, worst <= 1e-9 && std::abs(integral - 1.0) <= 1e-3 && secs < 10.0,
         "max |log diff| " + fmt("%.3g", worst) + ", integral " + fmt("%.6f", integral) + ", " + fmt("%.2f", secs) + " s");
}

// 2. Baselines on the four-point fixture and against direct formulas
void baselines() {
  const auto d = fixtures::four_points();
  const auto p = Partition::from_labels(*d.labels());
  const double ch = calinski_harabasz(d, p).value;
  const double db = davies_bouldin(d, p).value;
  const double sc = silhouette(d, p).value;
  const double sc_listed = 0.90167;
  bool hand = std::abs(ch - 200.0) <= 1e-9 && std::abs(db - 0.1) <= 1e-9 && std::abs(sc - sc_listed) <= 1e-9;

  Rng rng(77);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 5 + rng.index(40);
    const std::size_t k = 2 + rng.index(3);
    const auto data = fixtures::random_clustered(rng, n, 1 + rng.index(3), k);
    const auto raw = fixtures::random_labels(rng, n, k);
    const auto part = Partition::from_labels(raw);
    const auto pts = oracle::rows(data);
    const double o_ch = oracle::calinski_harabasz(pts, raw);
    worst = std::max(worst, std::abs(calinski_harabasz(data, part).value - o_ch) / std::max(1.0, std::abs(o_ch)));
    worst = std::max(worst, std::abs(silhouette(data, part).value - oracle::silhouette(pts, raw)));
    worst = std::max(worst, std::abs(davies_bouldin(data, part).value - oracle::davies_bouldin(pts, raw)));
  }
  const double exact_sc = (9.5 / 10.5 + 8.5 / 9.5) / 2.0;
  report(2, hand && worst <= 1e-9,
         "CH " + fmt("%.12g", ch) + ", DB " + fmt("%.12g", db) + ", SC " + fmt("%.9f", sc) + " (listed " +
             fmt("%.5f", sc_listed) + ", exact per-sample mean " + fmt("%.9f", exact_sc) + "), random max diff " +
             fmt("%.3g", worst));
}

// 3. ARI
void enumerate(std::size_t n, std::vector<int>& cur, int used, const std::function<void(const std::vector<int>&)>& fn) {
  if (cur.size() == n) {
    fn(cur);
    return;
  }
  for (int l = 0; l <= used + 1; ++l) {
    cur.push_back(l);
    enumerate(n, cur, std::max(used, l), fn);
    cur.pop_back();
  }
}

void ari() {
  bool ok = adjusted_rand_index(std::vector<int>{0, 0, 1, 2}, std::vector<int>{3, 3, 1, 0}) == 1.0;
  double worst = 0.0;
  std::size_t pairs = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<std::vector<int>> all;
    std::vector<int> cur;
    enumerate(n, cur, -1, [&](const std::vector<int>& p) { all.push_back(p); });
    for (const auto& a : all) {
      if (adjusted_rand_index(a, a) != 1.0) ok = false;
      for (const auto& b : all) {
        worst = std::max(worst, std::abs(adjusted_rand_index(a, b) - oracle::ari_pairs(a, b)));
        ++pairs;
      }
    }
  }
  Rng rng(3);
  std::size_t relabel_bad = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + rng.index(50);
    const auto a = fixtures::random_labels(rng, n, 1 + rng.index(std::min<std::size_t>(n, 6)));
    const auto b = fixtures::random_labels(rng, n, 1 + rng.index(std::min<std::size_t>(n, 6)));
    std::vector<int> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(3 * i + 1);
    rng.shuffle(perm);
    std::vector<int> a2;
    for (int l : a) a2.push_back(perm[static_cast<std::size_t>(l)]);
    if (adjusted_rand_index(a, b) != adjusted_rand_index(a2, b)) ++relabel_bad;
  }
  report(3, ok && worst <= 1e-12 && relabel_bad == 0,
         std::to_string(pairs) + " exhaustive pairs, max diff " + fmt("%.3g", worst) + ", relabel mismatches " +
             std::to_string(relabel_bad));
}

// 4. Definitional equivalence of every KDE-index term
void definitional() {
  Rng rng(404);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const std::size_t k = 1 + rng.index(4);
    const std::size_t n = 20 + rng.index(41);
    const auto d = fixtures::random_clustered(rng, n, 1 + rng.index(3), k);
    const auto part = t % 2 == 0 ? Partition::from_labels(*d.labels())
                                 : Partition::from_labels(fixtures::random_labels(rng, n, k));
    KdiParams p;
    p.delta = rng.uniform();
    p.alpha1 = rng.uniform(0.2, 3.0);
    p.alpha2 = rng.uniform(0.2, 3.0);
    p.beta1 = rng.uniform(0.2, 2.0);
    p.beta2 = rng.uniform(0.2, 2.0);
    p.rho = rng.uniform(0.0, 1.5);
    p.mc_samples = 3000;
    p.compute_boundary = true;
    const auto set = fit_profiles(d, part, p);
    const auto s = score_profiles(d, set, p);
    oracle::KdiSetup os{p.alpha1, p.alpha2, p.beta1, p.beta2, p.rho, p.min_cluster_size, p.mc_samples, 900u + t};
    const auto o = oracle::kdi(d, part.labels(), bandwidths(set), os);
    const double diffs[] = {
        s.I_a - o.I_a,
        s.I_s - o.I_s,
        s.I - (p.delta * o.I_a + (1.0 - p.delta) * o.I_s),
        *s.I_b - o.I_b,
        ambiguous_v1(set) - o.ia_v1,
        ambiguous_v2(set) - o.ia_v2,
        ambiguous_v3(d, set, p.mc_samples, 900u + t) - o.ia_v3,
        similarity_v1(set, n).value - o.is_v1,
        similarity_v2(set, n).value - o.is_v2,
        similarity_v3(set, n).value - o.is_v3,
    };
    for (double v : diffs) worst = std::max(worst, std::abs(v));
  }
  report(4, worst <= 1e-10, "10 fixtures, max diff " + fmt("%.3g", worst));
}

// 5. Ranges, mixture identity, relabel invariance
void invariants() {
  const auto t0 = Clock::now();
  Rng rng(5005);
  std::size_t out_of_range = 0, mixture_bad = 0, relabel_bad = 0;
  auto in01 = [&](double v) {
    if (!(v >= 0.0 && v <= 1.0)) ++out_of_range;
  };
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 8 + rng.index(33);
    const std::size_t k = 1 + rng.index(4);
    const auto d = fixtures::random_clustered(rng, n, 1 + rng.index(3), k);
    const auto raw = fixtures::random_labels(rng, n, k);
    KdiParams p;
    p.delta = rng.uniform();
    p.alpha1 = rng.uniform(0.0, 3.0);
    p.alpha2 = rng.uniform(0.0, 3.0);
    p.beta1 = rng.uniform(0.0, 2.0);
    p.beta2 = rng.uniform(0.0, 2.0);
    p.rho = rng.uniform(0.0, 2.0);
    p.mc_samples = 200;
    p.seed = rng.index(1000);
    p.compute_boundary = true;
    std::vector<int> relabeled;
    for (int l : raw) relabeled.push_back(50 - 3 * l);
    const auto a_set = fit_profiles(d, Partition::from_labels(raw), p);
    const auto b_set = fit_profiles(d, Partition::from_labels(relabeled), p);
    const auto a = score_profiles(d, a_set, p);
    const auto b = score_profiles(d, b_set, p);
    const double v3a = ambiguous_v3(d, a_set, p.mc_samples, p.seed);
    const double terms[] = {a.I,
                            a.I_a,
                            a.I_s,
                            *a.I_b,
                            ambiguous_v1(a_set),
                            ambiguous_v2(a_set),
                            v3a,
                            similarity_v1(a_set, n).value,
                            similarity_v2(a_set, n).value,
                            similarity_v3(a_set, n).value};
    for (double v : terms) in01(v);
    if (std::abs(a.I - (p.delta * a.I_a + (1.0 - p.delta) * a.I_s)) > 1e-12) ++mixture_bad;
    if (a.I != b.I || a.I_a != b.I_a || a.I_s != b.I_s || a.I_b != b.I_b ||
        v3a != ambiguous_v3(d, b_set, p.mc_samples, p.seed) || ambiguous_v1(a_set) != ambiguous_v1(b_set) ||
        ambiguous_v2(a_set) != ambiguous_v2(b_set) || similarity_v1(a_set, n).value != similarity_v1(b_set, n).value ||
        similarity_v2(a_set, n).value != similarity_v2(b_set, n).value ||
        similarity_v3(a_set, n).value != similarity_v3(b_set, n).value) {
      ++relabel_bad;
    }
  }
  report(5, out_of_range == 0 && mixture_bad == 0 && relabel_bad == 0,
         "1000 cases: out of range " + std::to_string(out_of_range) + ", mixture " + std::to_string(mixture_bad) +
             ", relabel " + std::to_string(relabel_bad) + ", " + fmt("%.1f", seconds_since(t0)) + " s");
}

// 6. Model selection on four blobs across delta
void model_selection() {
  const auto t0 = Clock::now();
  const auto d = fixtures::four_blobs();
  RunConfig cfg;
  cfg.seed = 1;
  cfg.k_min = 2;
  cfg.k_max = 10;
  cfg.indices = {IndexId::kdi};
  const auto cands = build_candidates(d, 2, 10, *cfg.seed);
  bool ok = true;
  std::string detail;
  for (int tenths = 3; tenths <= 7; ++tenths) {
    cfg.kdi.delta = tenths / 10.0;
    const auto rep = evaluate_candidates(cfg, d, cands.partitions);
    const auto& champ = rep.rows[rep.outcome(IndexId::kdi).champion()];
    ok = ok && *champ.ari >= 0.95;
    detail += fmt("d=%.1f:", cfg.kdi.delta) + champ.source + fmt("(%.3f) ", *champ.ari);
  }
  const double secs = seconds_since(t0);
  report(6, ok && secs < 60.0, detail + fmt("%.1f s", secs));
}

// 7. Opposing pulls of the two terms
void equilibrium() {
  const auto d = fixtures::four_blobs();
  KdiParams p;
  const auto k2 = kdi_index(d, kmeans(d, 2, mix_seed(1, 2)), p);
  const auto k4 = kdi_index(d, kmeans(d, 4, mix_seed(1, 4)), p);
  const auto k10 = kdi_index(d, kmeans(d, 10, mix_seed(1, 10)), p);
  report(7, k10.I_a > k4.I_a && k2.I_s > k4.I_s,
         fmt("I_a(10)=%.4f", k10.I_a) + fmt(" I_a(4)=%.4f", k4.I_a) + fmt(" I_s(2)=%.4f", k2.I_s) +
             fmt(" I_s(4)=%.4f", k4.I_s));
}

// 8. Two rings: density-based vs centroid-based
void rings() {
  const auto t0 = Clock::now();
  const auto d = fixtures::two_rings();
  RunConfig cfg;
  cfg.seed = 1;
  cfg.k_min = 2;
  cfg.k_max = 2;
  cfg.indices = {IndexId::ch, IndexId::kdi};
  const auto rep = evaluate_dataset(cfg, d);
  bool has_single = false, has_kmeans = false;
  for (const auto& r : rep.rows) {
    has_single = has_single || r.source.find("single_k2") != std::string::npos;
    has_kmeans = has_kmeans || r.source.find("kmeans_k2") != std::string::npos;
  }
  const auto& kdi_champ = rep.rows[rep.outcome(IndexId::kdi).champion()];
  const auto& ch_champ = rep.rows[rep.outcome(IndexId::ch).champion()];
  const double secs = seconds_since(t0);
  report(8, has_single && has_kmeans && *kdi_champ.ari >= 0.95 && *ch_champ.ari < 0.95 && secs < 60.0,
         "new -> " + kdi_champ.source + fmt(" (%.3f)", *kdi_champ.ari) + ", ch -> " + ch_champ.source +
             fmt(" (%.3f), ", *ch_champ.ari) + fmt("%.1f s", secs));

  // wider sweep, informational only
  cfg.k_max = 10;
  const auto wide = evaluate_dataset(cfg, d);
  const auto& w_kdi = wide.rows[wide.outcome(IndexId::kdi).champion()];
  const auto& w_ch = wide.rows[wide.outcome(IndexId::ch).champion()];
  std::printf("   info: rings with K=2..10: new -> %s (%.3f), ch -> %s (%.3f)\n", w_kdi.source.c_str(), *w_kdi.ari,
              w_ch.source.c_str(), *w_ch.ari);
}

// 9. CLI determinism
void determinism() {
  const auto dir = fs::temp_directory_path() / "kdeval_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_csv(dir / "blobs.csv", fixtures::four_blobs());
  auto once = [&](const std::string& name) {
    return run(std::string("\"") + KDEVAL_CLI + "\" evaluate " + (dir / "blobs.csv").string() +
               " --label-column -1 --k-max 6 --seed 11 --svg -o " + (dir / name).string() + " >/dev/null 2>&1");
  };
  const int ra = once("a");
  const int rb = once("b");
  std::size_t compared = 0, differ = 0;
  if (ra == 0 && rb == 0) {
    for (const auto& e : fs::directory_iterator(dir / "a")) {
      const auto name = e.path().filename();
      if (name == "summary.txt") continue;  // wall-clock runtime line
      ++compared;
      if (slurp(e.path()) != slurp(dir / "b" / name)) ++differ;
    }
  }
  report(9, ra == 0 && rb == 0 && compared > 1 && differ == 0,
         std::to_string(compared) + " files compared (report.csv + SVGs), " + std::to_string(differ) + " differ");
}

// 10. Whole suite under five minutes
void suite_time(Clock::time_point start) {
  const auto t0 = Clock::now();
  std::istringstream list(KDEVAL_TEST_BINARIES);
  std::string bin;
  bool ok = true;
  while (std::getline(list, bin, ';')) {
    if (bin.empty()) continue;
    ok = run("\"" + bin + "\" --gtest_brief=1 >/dev/null 2>&1") == 0 && ok;
  }
  const double unit = seconds_since(t0);
  const double total = seconds_since(start);
  report(10, ok && total < 300.0,
         fmt("unit tests %.1f s", unit) + fmt(", acceptance total %.1f s", total) + (ok ? "" : ", unit failures"));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  kde_oracle();
  baselines();
  ari();
  definitional();
  invariants();
  model_selection();
  equilibrium();
  rings();
  determinism();
  suite_time(start);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

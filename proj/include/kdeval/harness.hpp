#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdeval/baseline_indices.hpp"
#include "kdeval/config.hpp"
#include "kdeval/data_io.hpp"
#include "kdeval/density.hpp"
#include "kdeval/kdi.hpp"
#include "kdeval/partition.hpp"

namespace kdeval {

inline constexpr double kSuccessThreshold = 0.95;

inline bool is_success(double ari) { return ari > kSuccessThreshold; }

struct CandidateRow {
  std::string source;
  int k = 0;
  std::vector<std::optional<double>> values;  // aligned with EvaluationReport::indices
  std::optional<double> kdi_ia;               // main sub-indices, when any KDE index ran
  std::optional<double> kdi_is;
  std::optional<double> kdi_ib;
  std::optional<double> ari;
  std::vector<BandwidthChoice> bandwidths;
};

struct IndexOutcome {
  IndexId id{};
  Direction direction{};
  std::vector<std::size_t> order;  // row indices, best first
  std::optional<double> champion_ari;
  std::optional<bool> success;  // absent without a reference

  std::size_t champion() const { return order.front(); }
};

struct EvaluationReport {
  std::string dataset_id;
  std::size_t n = 0;
  std::size_t dim = 0;
  bool has_reference = false;
  RunConfig config;
  std::vector<IndexId> indices;
  std::vector<CandidateRow> rows;
  std::vector<Partition> partitions;  // aligned with rows
  std::vector<IndexOutcome> outcomes;  // aligned with indices
  std::vector<std::string> warnings;
  double seconds = 0.0;

  const IndexOutcome& outcome(IndexId id) const {
    for (const auto& o : outcomes) {
      if (o.id == id) return o;
    }
    throw std::out_of_range(std::string("index not evaluated: ") + to_string(id));
  }
  std::size_t column(IndexId id) const {
    for (std::size_t c = 0; c < indices.size(); ++c) {
      if (indices[c] == id) return c;
    }
    throw std::out_of_range(std::string("index not evaluated: ") + to_string(id));
  }
};

// ---------------------------------------------------------------------------
// Ranking

/// Best-first order. Undefined (absent or NaN) values go last; ties break on smaller K, then
/// source tag.
inline std::vector<std::size_t> rank_candidates(std::span<const std::optional<double>> values,
                                                std::span<const int> ks, std::span<const std::string> sources,
                                                Direction direction) {
  if (values.size() != ks.size() || values.size() != sources.size()) {
    throw std::invalid_argument("rank_candidates: length mismatch");
  }
  auto defined = [&](std::size_t i) { return values[i].has_value() && !std::isnan(*values[i]); };
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const bool da = defined(a);
    const bool db = defined(b);
    if (da != db) return da;
    if (da && *values[a] != *values[b]) {
      return direction == Direction::higher_better ? *values[a] > *values[b] : *values[a] < *values[b];
    }
    if (ks[a] != ks[b]) return ks[a] < ks[b];
    if (sources[a] != sources[b]) return sources[a] < sources[b];
    return a < b;
  });
  return order;
}

// ---------------------------------------------------------------------------
// Scoring

namespace detail {

inline KdiParams variant_params(const KdiParams& base, IndexId id) {
  KdiParams p = base;
  switch (id) {
    case IndexId::kdi_ib: p.mix_with = MixTerm::boundary; break;
    case IndexId::kdi_ia_v1: p.ambiguous_variant = AmbiguousVariant::v1; break;
    case IndexId::kdi_ia_v2: p.ambiguous_variant = AmbiguousVariant::v2; break;
    case IndexId::kdi_ia_v3: p.ambiguous_variant = AmbiguousVariant::v3; break;
    case IndexId::kdi_is_v1: p.similarity_variant = SimilarityVariant::v1; break;
    case IndexId::kdi_is_v2: p.similarity_variant = SimilarityVariant::v2; break;
    case IndexId::kdi_is_v3:
      p.similarity_variant = SimilarityVariant::v3;
      p.dispersion.normalize = true;
      break;
    default: break;
  }
  return p;
}

inline std::optional<double> baseline_value(IndexId id, const Dataset& data, const Partition& p,
                                            std::vector<std::string>& warnings) {
  try {
    switch (id) {
      case IndexId::ch: return calinski_harabasz(data, p).value;
      case IndexId::sc: return silhouette(data, p).value;
      case IndexId::db: return davies_bouldin(data, p).value;
      default: return std::nullopt;
    }
  } catch (const std::exception& e) {
    warnings.push_back(p.source() + ": " + to_string(id) + " undefined (" + e.what() + ")");
    return std::nullopt;
  }
}

inline KdiParams run_kdi_params(const RunConfig& cfg) {
  KdiParams p = cfg.kdi;
  p.seed = cfg.seed.value_or(0);
  return p;
}

/// Fills one row; KDE-family indices share a single profile fit.
inline CandidateRow score_candidate(const RunConfig& cfg, const Dataset& data, const Partition& p,
                                    std::span<const IndexId> indices, std::vector<std::string>& warnings) {
  CandidateRow row;
  row.source = p.source();
  row.k = p.num_clusters();
  row.values.assign(indices.size(), std::nullopt);
  bool any_kdi = false;
  for (std::size_t c = 0; c < indices.size(); ++c) {
    if (is_kdi_family(indices[c])) any_kdi = true;
    else row.values[c] = baseline_value(indices[c], data, p, warnings);
  }
  if (any_kdi) {
    try {
      const KdiParams base = run_kdi_params(cfg);
      const auto set = fit_profiles(data, p, base, cfg.bandwidth);
      const auto main = score_profiles(data, set, base);
      row.kdi_ia = main.I_a;
      row.kdi_is = main.I_s;
      row.kdi_ib = main.I_b;
      for (const auto& c : set.clusters) row.bandwidths.push_back({c.model.bandwidth(), c.bandwidth_method});
      for (std::size_t c = 0; c < indices.size(); ++c) {
        if (!is_kdi_family(indices[c])) continue;
        if (indices[c] == IndexId::kdi) {
          row.values[c] = main.I;
          continue;
        }
        const auto s = score_profiles(data, set, variant_params(base, indices[c]));
        row.values[c] = s.I;
        if (indices[c] == IndexId::kdi_ib) row.kdi_ib = s.I_b;
      }
    } catch (const std::exception& e) {
      warnings.push_back(p.source() + ": density-based indices failed (" + e.what() + ")");
    }
  }
  if (data.labels()) row.ari = adjusted_rand_index(*data.labels(), p.labels());
  return row;
}

}  // namespace detail

/// Scores supplied candidates with every configured index, ranks them and applies the
/// success rule against the dataset's reference labels (when present).
inline EvaluationReport evaluate_candidates(const RunConfig& cfg, const Dataset& data,
                                            std::vector<Partition> candidates,
                                            std::vector<std::string> warnings = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  if (candidates.empty()) throw std::invalid_argument("evaluate: no candidate partitions");
  EvaluationReport rep;
  rep.dataset_id = data.id();
  rep.n = data.size();
  rep.dim = data.dim();
  rep.has_reference = data.has_labels();
  rep.config = cfg;
  rep.indices = cfg.indices;
  rep.warnings = std::move(warnings);
  for (const auto& p : candidates) {
    check_sizes(data, p);
    rep.rows.push_back(detail::score_candidate(cfg, data, p, rep.indices, rep.warnings));
  }
  rep.partitions = std::move(candidates);

  std::vector<int> ks;
  std::vector<std::string> sources;
  for (const auto& r : rep.rows) {
    ks.push_back(r.k);
    sources.push_back(r.source);
  }
  for (std::size_t c = 0; c < rep.indices.size(); ++c) {
    std::vector<std::optional<double>> vals;
    for (const auto& r : rep.rows) vals.push_back(r.values[c]);
    IndexOutcome o;
    o.id = rep.indices[c];
    o.direction = direction_of(o.id);
    o.order = rank_candidates(vals, ks, sources, o.direction);
    if (rep.has_reference) {
      o.champion_ari = rep.rows[o.champion()].ari;
      o.success = is_success(*o.champion_ari);
    }
    rep.outcomes.push_back(std::move(o));
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Full protocol on one dataset: generate candidates, score, rank, judge.
inline EvaluationReport evaluate_dataset(const RunConfig& cfg, const Dataset& data) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t k_max = std::min(cfg.k_max, data.size());
  if (cfg.k_min > k_max) throw std::invalid_argument("evaluate: k_min exceeds the number of points");
  auto cands = build_candidates(data, cfg.k_min, k_max, *cfg.seed, cfg.generators);
  std::vector<std::string> warnings = std::move(cands.warnings);
  if (k_max < cfg.k_max) {
    warnings.insert(warnings.begin(), "k_max clamped to n=" + std::to_string(data.size()));
  }
  auto rep = evaluate_candidates(cfg, data, std::move(cands.partitions), std::move(warnings));
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Aggregation

struct AccuracyTable {
  std::vector<IndexId> indices;
  std::vector<std::string> dataset_ids;
  std::vector<std::vector<bool>> grid;  // [dataset][index]
  std::vector<std::size_t> succeeded;   // per index
  std::size_t total = 0;
  std::vector<std::string> warnings;

  std::string accuracy(std::size_t c) const {
    return std::to_string(succeeded[c]) + "/" + std::to_string(total);
  }
};

inline AccuracyTable aggregate_accuracy(std::span<const EvaluationReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate_accuracy: no reports");
  AccuracyTable t;
  t.indices = reports.front().indices;
  t.succeeded.assign(t.indices.size(), 0);
  for (const auto& r : reports) {
    if (!r.has_reference) {
      t.warnings.push_back(r.dataset_id + ": no reference labels, excluded from accuracy");
      continue;
    }
    if (r.indices != t.indices) {
      throw std::invalid_argument("aggregate_accuracy: '" + r.dataset_id + "' was scored with different indices");
    }
    std::vector<bool> cells;
    for (std::size_t c = 0; c < t.indices.size(); ++c) {
      const bool ok = r.outcomes[c].success.value_or(false);
      cells.push_back(ok);
      if (ok) ++t.succeeded[c];
    }
    t.dataset_ids.push_back(r.dataset_id);
    t.grid.push_back(std::move(cells));
    ++t.total;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Loading inputs

inline bool is_dataset_file(const std::filesystem::path& p) {
  const auto ext = text::lower(p.extension().string());
  return ext == ".csv" || ext == ".arff" || ext == ".txt" || ext == ".dat" || ext == ".data";
}

/// Loads a dataset by extension; a sibling `<stem>.labels` file supplies labels when the
/// file itself has none.
inline Dataset load_input(const std::filesystem::path& path, const RunConfig& cfg) {
  const auto fmt = format_from_path(path);
  auto data = load_dataset(path, fmt, fmt == FileFormat::arff ? std::nullopt : cfg.label_column);
  if (!data.has_labels()) {
    auto companion = path;
    companion.replace_extension(".labels");
    if (std::filesystem::exists(companion)) data = data.with_labels(load_labels(companion));
  }
  return data;
}

/// Dataset files directly inside `dir`, sorted by name.
inline std::vector<std::filesystem::path> list_datasets(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && is_dataset_file(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationCell {
  int delta_tenths = 5;
  double alpha = 1.0;
  std::size_t successes = 0;
};

struct CalibrationResult {
  KdiParams params;
  std::size_t successes = 0;
  std::size_t datasets = 0;
  std::vector<CalibrationCell> cells;
};

inline constexpr double kCalibrationAlphas[] = {0.5, 1.0, 2.0, 3.0};

/// Grid search over delta in {0.1..0.9} x alpha1=alpha2 in {0.5,1,2,3}, maximizing the number of
/// training datasets whose champion succeeds. Ties: delta closest to 0.5, smaller alpha, smaller
/// delta. Densities are fitted once per candidate; only the territories change with alpha.
inline CalibrationResult calibrate(const RunConfig& cfg, std::span<const Dataset> training) {
  if (training.empty()) throw std::invalid_argument("calibrate: empty training list");
  cfg.validate();
  constexpr std::size_t kAlphas = std::size(kCalibrationAlphas);
  std::vector<std::size_t> wins(9 * kAlphas, 0);

  for (const auto& data : training) {
    if (!data.has_labels()) throw std::invalid_argument("calibrate: '" + data.id() + "' has no reference labels");
    const std::size_t k_max = std::min(cfg.k_max, data.size());
    const auto cands = build_candidates(data, cfg.k_min, k_max, *cfg.seed, cfg.generators);
    const std::size_t m = cands.partitions.size();
    std::vector<int> ks;
    std::vector<std::string> sources;
    std::vector<double> ari;
    // (I_a, second ingredient) per alpha and candidate; empty when the fit fails
    std::vector<std::vector<std::optional<std::pair<double, double>>>> sub(kAlphas);
    for (const auto& p : cands.partitions) {
      ks.push_back(p.num_clusters());
      sources.push_back(p.source());
      ari.push_back(adjusted_rand_index(*data.labels(), p.labels()));
      KdiParams params = detail::run_kdi_params(cfg);
      try {
        auto set = fit_profiles(data, p, params, cfg.bandwidth);
        for (std::size_t a = 0; a < kAlphas; ++a) {
          params.alpha1 = params.alpha2 = kCalibrationAlphas[a];
          apply_intervals(set, params);
          const auto s = score_profiles(data, set, params);
          sub[a].emplace_back(std::pair{s.I_a, params.mix_with == MixTerm::boundary ? *s.I_b : s.I_s});
        }
      } catch (const std::exception&) {
        for (std::size_t a = 0; a < kAlphas; ++a) sub[a].emplace_back(std::nullopt);
      }
    }
    for (std::size_t a = 0; a < kAlphas; ++a) {
      for (int d = 1; d <= 9; ++d) {
        const double delta = d / 10.0;
        std::vector<std::optional<double>> vals(m);
        for (std::size_t i = 0; i < m; ++i) {
          if (sub[a][i]) vals[i] = delta * sub[a][i]->first + (1.0 - delta) * sub[a][i]->second;
        }
        const auto order = rank_candidates(vals, ks, sources, Direction::smaller_better);
        if (is_success(ari[order.front()])) ++wins[a * 9 + static_cast<std::size_t>(d - 1)];
      }
    }
  }

  CalibrationResult out;
  out.datasets = training.size();
  const CalibrationCell* best = nullptr;
  for (std::size_t a = 0; a < kAlphas; ++a) {
    for (int d = 1; d <= 9; ++d) {
      out.cells.push_back({d, kCalibrationAlphas[a], wins[a * 9 + static_cast<std::size_t>(d - 1)]});
    }
  }
  auto better = [](const CalibrationCell& x, const CalibrationCell& y) {
    if (x.successes != y.successes) return x.successes > y.successes;
    const int dx = std::abs(x.delta_tenths - 5);
    const int dy = std::abs(y.delta_tenths - 5);
    if (dx != dy) return dx < dy;
    if (x.alpha != y.alpha) return x.alpha < y.alpha;
    return x.delta_tenths < y.delta_tenths;
  };
  for (const auto& c : out.cells) {
    if (!best || better(c, *best)) best = &c;
  }
  out.params = cfg.kdi;
  out.params.delta = best->delta_tenths / 10.0;
  out.params.alpha1 = out.params.alpha2 = best->alpha;
  out.successes = best->successes;
  return out;
}

}  // namespace kdeval

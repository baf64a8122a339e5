#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kdeval/baseline_indices.hpp"
#include "kdeval/density.hpp"
#include "kdeval/kdi.hpp"
#include "kdeval/partition.hpp"
#include "kdeval/text.hpp"

namespace kdeval {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Environment variable naming a config file, read before command-line overrides.
inline constexpr const char* kConfigEnvVar = "KDEVAL_CONFIG";

/// Indices the harness can rank. The `new_*` entries are the mixed index with one ingredient
/// swapped for a variant (or for the Boundary Index).
enum class IndexId { ch, sc, db, kdi, kdi_ib, kdi_ia_v1, kdi_ia_v2, kdi_ia_v3, kdi_is_v1, kdi_is_v2, kdi_is_v3 };

inline constexpr IndexId kAllIndices[] = {IndexId::ch,        IndexId::sc,        IndexId::db,
                                          IndexId::kdi,       IndexId::kdi_ib,    IndexId::kdi_ia_v1,
                                          IndexId::kdi_ia_v2, IndexId::kdi_ia_v3, IndexId::kdi_is_v1,
                                          IndexId::kdi_is_v2, IndexId::kdi_is_v3};

inline const char* to_string(IndexId id) {
  switch (id) {
    case IndexId::ch: return "ch";
    case IndexId::sc: return "sc";
    case IndexId::db: return "db";
    case IndexId::kdi: return "new";
    case IndexId::kdi_ib: return "new_ib";
    case IndexId::kdi_ia_v1: return "new_ia_v1";
    case IndexId::kdi_ia_v2: return "new_ia_v2";
    case IndexId::kdi_ia_v3: return "new_ia_v3";
    case IndexId::kdi_is_v1: return "new_is_v1";
    case IndexId::kdi_is_v2: return "new_is_v2";
    case IndexId::kdi_is_v3: return "new_is_v3";
  }
  return "?";
}

inline Direction direction_of(IndexId id) {
  return id == IndexId::ch || id == IndexId::sc ? Direction::higher_better : Direction::smaller_better;
}

inline bool is_kdi_family(IndexId id) {
  return id != IndexId::ch && id != IndexId::sc && id != IndexId::db;
}

inline IndexId index_from_string(std::string_view s) {
  for (auto id : kAllIndices) {
    if (text::iequals(s, to_string(id))) return id;
  }
  throw ConfigError("unknown index '" + std::string(s) + "'");
}

struct RunConfig {
  std::vector<std::string> dataset_paths;
  std::size_t k_min = 2;
  std::size_t k_max = 30;
  std::vector<Generator> generators{std::begin(kAllGenerators), std::end(kAllGenerators)};
  KdiParams kdi;
  BandwidthPolicy bandwidth;
  std::string output_dir = "out";
  std::optional<std::uint64_t> seed;
  bool emit_svg = false;
  std::vector<IndexId> indices{IndexId::ch, IndexId::sc, IndexId::db, IndexId::kdi};
  std::optional<int> label_column;  // csv/whitespace inputs; negative counts from the end
  std::size_t top_n = 5;

  void validate() const {
    if (!seed) throw ConfigError("a seed is required (run.seed or --seed)");
    if (k_min < 1 || k_min > k_max) throw ConfigError("k range is empty");
    if (generators.empty()) throw ConfigError("no generators selected");
    if (indices.empty()) throw ConfigError("no indices selected");
    if (bandwidth.folds < 2) throw ConfigError("bandwidth.folds must be at least 2");
    try {
      kdi.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

/// Ordered "section.key" -> value pairs.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// `[section]` headers, `key = value` lines, `#` or `;` comments. Keys before any header
/// belong to [run].
inline ConfigEntries parse_config_text(std::string_view content) {
  ConfigEntries out;
  std::string section = "run";
  std::istringstream in{std::string(content)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
      section = text::lower(text::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    out.emplace_back(section + "." + text::lower(text::trim(line.substr(0, eq))),
                     std::string(text::trim(line.substr(eq + 1))));
  }
  return out;
}

namespace detail {

inline double config_double(const std::string& key, const std::string& v) {
  const auto d = text::parse_double(v);
  if (!d) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return *d;
}

inline long long config_int(const std::string& key, const std::string& v) {
  const auto i = text::parse_int(v);
  if (!i) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return *i;
}

inline std::size_t config_count(const std::string& key, const std::string& v) {
  const auto i = config_int(key, v);
  if (i < 0) throw ConfigError(key + ": must be non-negative");
  return static_cast<std::size_t>(i);
}

inline bool config_bool(const std::string& key, const std::string& v) {
  const auto l = text::lower(v);
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

template <class Fn>
auto config_list(const std::string& v, Fn&& parse) {
  std::vector<decltype(parse(std::string_view{}))> out;
  if (text::trim(v).empty()) return out;
  for (auto item : text::split(v, ',')) out.push_back(parse(text::trim(item)));
  return out;
}

}  // namespace detail

inline void apply_config(const ConfigEntries& entries, RunConfig& cfg) {
  using namespace detail;
  for (const auto& [key, v] : entries) {
    try {
      if (key == "run.seed") cfg.seed = static_cast<std::uint64_t>(config_int(key, v));
      else if (key == "run.k_min") cfg.k_min = config_count(key, v);
      else if (key == "run.k_max") cfg.k_max = config_count(key, v);
      else if (key == "run.indices") cfg.indices = config_list(v, [](std::string_view s) { return index_from_string(s); });
      else if (key == "run.generators") cfg.generators = config_list(v, [](std::string_view s) { return generator_from_string(s); });
      else if (key == "run.svg") cfg.emit_svg = config_bool(key, v);
      else if (key == "run.output") cfg.output_dir = v;
      else if (key == "run.top_n") cfg.top_n = config_count(key, v);
      else if (key == "run.label_column") {
        if (text::iequals(v, "none") || v.empty()) cfg.label_column.reset();
        else if (text::iequals(v, "last")) cfg.label_column = -1;
        else cfg.label_column = static_cast<int>(config_int(key, v));
      }
      else if (key == "kdi.delta") cfg.kdi.delta = config_double(key, v);
      else if (key == "kdi.alpha1") cfg.kdi.alpha1 = config_double(key, v);
      else if (key == "kdi.alpha2") cfg.kdi.alpha2 = config_double(key, v);
      else if (key == "kdi.beta1") cfg.kdi.beta1 = config_double(key, v);
      else if (key == "kdi.beta2") cfg.kdi.beta2 = config_double(key, v);
      else if (key == "kdi.rho") cfg.kdi.rho = config_double(key, v);
      else if (key == "kdi.min_cluster_size") cfg.kdi.min_cluster_size = config_count(key, v);
      else if (key == "kdi.mc_samples") cfg.kdi.mc_samples = config_count(key, v);
      else if (key == "kdi.ambiguous_variant") cfg.kdi.ambiguous_variant = ambiguous_variant_from_string(v);
      else if (key == "kdi.similarity_variant") cfg.kdi.similarity_variant = similarity_variant_from_string(v);
      else if (key == "kdi.mix_with") {
        if (text::iequals(v, "similarity")) cfg.kdi.mix_with = MixTerm::similarity;
        else if (text::iequals(v, "boundary")) cfg.kdi.mix_with = MixTerm::boundary;
        else throw ConfigError(key + ": expected similarity or boundary");
      }
      else if (key == "kdi.compute_boundary") cfg.kdi.compute_boundary = config_bool(key, v);
      else if (key == "kdi.boundary_members_only") cfg.kdi.boundary_members_only = config_bool(key, v);
      else if (key == "kdi.pair_normalization") {
        if (text::iequals(v, "pair")) cfg.kdi.pair_global_normalization = false;
        else if (text::iequals(v, "global")) cfg.kdi.pair_global_normalization = true;
        else throw ConfigError(key + ": expected pair or global");
      }
      else if (key == "kdi.v3_center") {
        if (text::iequals(v, "mean")) cfg.kdi.dispersion.center = DispersionCenter::mean;
        else if (text::iequals(v, "median")) cfg.kdi.dispersion.center = DispersionCenter::median;
        else throw ConfigError(key + ": expected mean or median");
      }
      else if (key == "kdi.v3_metric") {
        if (text::iequals(v, "abs")) cfg.kdi.dispersion.metric = DispersionMetric::absolute;
        else if (text::iequals(v, "squared")) cfg.kdi.dispersion.metric = DispersionMetric::squared;
        else throw ConfigError(key + ": expected abs or squared");
      }
      else if (key == "kdi.v3_normalize") cfg.kdi.dispersion.normalize = config_bool(key, v);
      else if (key == "kdi.v3_likelihood") cfg.kdi.dispersion.use_likelihood = config_bool(key, v);
      else if (key == "bandwidth.folds") cfg.bandwidth.folds = config_count(key, v);
      else if (key == "bandwidth.grid_size") cfg.bandwidth.grid_size = config_count(key, v);
      else if (key == "bandwidth.grid_lo") cfg.bandwidth.grid_lo = config_double(key, v);
      else if (key == "bandwidth.grid_hi") cfg.bandwidth.grid_hi = config_double(key, v);
      else if (key == "bandwidth.grid") {
        cfg.bandwidth.grid = config_list(v, [&](std::string_view s) { return config_double(key, std::string(s)); });
      }
      else if (key == "bandwidth.fixed") {
        if (text::iequals(v, "none") || v.empty()) cfg.bandwidth.fixed.reset();
        else cfg.bandwidth.fixed = config_double(key, v);
      }
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
}

inline void apply_config_file(const std::filesystem::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config(parse_config_text(ss.str()), cfg);
}

/// Full snapshot in the config file format; numbers use shortest round-trip form, so
/// reading the text back reproduces the configuration exactly.
inline std::string write_config(const RunConfig& cfg) {
  auto num = [](double v) { return text::exact(v); };
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::ostringstream o;
  o << "[run]\n";
  if (cfg.seed) o << "seed = " << *cfg.seed << '\n';
  o << "k_min = " << cfg.k_min << '\n'
    << "k_max = " << cfg.k_max << '\n'
    << "indices = " << text::join(cfg.indices, ",", [](IndexId i) { return std::string(to_string(i)); }) << '\n'
    << "generators = " << text::join(cfg.generators, ",", [](Generator g) { return std::string(to_string(g)); }) << '\n'
    << "svg = " << b(cfg.emit_svg) << '\n'
    << "top_n = " << cfg.top_n << '\n'
    << "label_column = " << (cfg.label_column ? std::to_string(*cfg.label_column) : std::string("none")) << '\n'
    << "\n[kdi]\n"
    << "delta = " << num(cfg.kdi.delta) << '\n'
    << "alpha1 = " << num(cfg.kdi.alpha1) << '\n'
    << "alpha2 = " << num(cfg.kdi.alpha2) << '\n'
    << "beta1 = " << num(cfg.kdi.beta1) << '\n'
    << "beta2 = " << num(cfg.kdi.beta2) << '\n'
    << "rho = " << num(cfg.kdi.rho) << '\n'
    << "min_cluster_size = " << cfg.kdi.min_cluster_size << '\n'
    << "mc_samples = " << cfg.kdi.mc_samples << '\n'
    << "ambiguous_variant = " << to_string(cfg.kdi.ambiguous_variant) << '\n'
    << "similarity_variant = " << to_string(cfg.kdi.similarity_variant) << '\n'
    << "mix_with = " << (cfg.kdi.mix_with == MixTerm::similarity ? "similarity" : "boundary") << '\n'
    << "compute_boundary = " << b(cfg.kdi.compute_boundary) << '\n'
    << "boundary_members_only = " << b(cfg.kdi.boundary_members_only) << '\n'
    << "pair_normalization = " << (cfg.kdi.pair_global_normalization ? "global" : "pair") << '\n'
    << "v3_center = " << (cfg.kdi.dispersion.center == DispersionCenter::mean ? "mean" : "median") << '\n'
    << "v3_metric = " << (cfg.kdi.dispersion.metric == DispersionMetric::absolute ? "abs" : "squared") << '\n'
    << "v3_normalize = " << b(cfg.kdi.dispersion.normalize) << '\n'
    << "v3_likelihood = " << b(cfg.kdi.dispersion.use_likelihood) << '\n'
    << "\n[bandwidth]\n"
    << "folds = " << cfg.bandwidth.folds << '\n'
    << "grid_size = " << cfg.bandwidth.grid_size << '\n'
    << "grid_lo = " << num(cfg.bandwidth.grid_lo) << '\n'
    << "grid_hi = " << num(cfg.bandwidth.grid_hi) << '\n'
    << "grid = " << text::join(cfg.bandwidth.grid, ",", num) << '\n'
    << "fixed = " << (cfg.bandwidth.fixed ? num(*cfg.bandwidth.fixed) : std::string("none")) << '\n';
  return o.str();
}

}  // namespace kdeval

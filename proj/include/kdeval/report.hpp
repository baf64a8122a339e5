#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "kdeval/config.hpp"
#include "kdeval/harness.hpp"
#include "kdeval/svg.hpp"
#include "kdeval/text.hpp"

namespace kdeval {

namespace detail {

inline std::string cell(const std::optional<double>& v) {
  return v && !std::isnan(*v) ? text::general(*v, 10) : std::string("NA");
}

inline std::string bandwidth_cell(const std::vector<BandwidthChoice>& bw) {
  if (bw.empty()) return "NA";
  return text::join(bw, ";", [](const BandwidthChoice& b) {
    return text::general(b.h, 6) + (b.method == BandwidthMethod::cross_validation ? "" : std::string("/") + to_string(b.method));
  });
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace detail

/// One row per candidate, in candidate order. Contains no timings, so identical runs produce
/// identical bytes.
inline void write_report_csv(std::ostream& o, const EvaluationReport& rep) {
  o << "source,k";
  for (auto id : rep.indices) o << ',' << to_string(id);
  o << ",term_ia,term_is,term_ib,ari,bandwidths";
  for (auto id : rep.indices) o << ",rank_" << to_string(id);
  o << '\n';
  std::vector<std::vector<std::size_t>> rank(rep.indices.size(), std::vector<std::size_t>(rep.rows.size()));
  for (std::size_t c = 0; c < rep.outcomes.size(); ++c) {
    const auto& order = rep.outcomes[c].order;
    for (std::size_t r = 0; r < order.size(); ++r) rank[c][order[r]] = r + 1;
  }
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    o << row.source << ',' << row.k;
    for (const auto& v : row.values) o << ',' << detail::cell(v);
    o << ',' << detail::cell(row.kdi_ia) << ',' << detail::cell(row.kdi_is) << ',' << detail::cell(row.kdi_ib)
      << ',' << detail::cell(row.ari) << ',' << detail::bandwidth_cell(row.bandwidths);
    for (std::size_t c = 0; c < rep.indices.size(); ++c) o << ',' << rank[c][i];
    o << '\n';
  }
}

inline std::string report_csv(const EvaluationReport& rep) {
  std::ostringstream o;
  write_report_csv(o, rep);
  return o.str();
}

inline void write_summary(std::ostream& o, const EvaluationReport& rep) {
  o << "dataset: " << rep.dataset_id << "\n"
    << "points: " << rep.n << "  dimensions: " << rep.dim
    << "  reference: " << (rep.has_reference ? "yes" : "no") << "\n"
    << "candidates: " << rep.rows.size() << "\n";
  std::size_t cv = 0, fallback = 0, fixed = 0;
  for (const auto& r : rep.rows) {
    for (const auto& b : r.bandwidths) {
      if (b.method == BandwidthMethod::cross_validation) ++cv;
      else if (b.method == BandwidthMethod::fallback) ++fallback;
      else ++fixed;
    }
  }
  o << "bandwidths: " << cv << " cross-validated, " << fallback << " rule-of-thumb, " << fixed << " fixed\n\n";

  const std::size_t top = std::min(rep.config.top_n, rep.rows.size());
  for (std::size_t c = 0; c < rep.indices.size(); ++c) {
    const auto& out = rep.outcomes[c];
    o << "[" << to_string(out.id) << "] "
      << (out.direction == Direction::higher_better ? "higher is better" : "smaller is better");
    if (out.success) o << "  champion ARI " << text::fixed(*out.champion_ari, 4) << "  " << (*out.success ? "S" : "F");
    o << "\n";
    for (std::size_t r = 0; r < top; ++r) {
      const auto& row = rep.rows[out.order[r]];
      o << "  " << r + 1 << ". " << row.source << "  K=" << row.k << "  value=" << detail::cell(row.values[c]);
      if (row.ari) o << "  ARI=" << text::fixed(*row.ari, 4);
      o << "\n";
    }
  }
  if (!rep.warnings.empty()) {
    o << "\nwarnings (" << rep.warnings.size() << "):\n";
    for (const auto& w : rep.warnings) o << "  " << w << "\n";
  }
  o << "\nruntime: " << text::fixed(rep.seconds, 3) << " s\n";
  o << "\nconfig:\n" << write_config(rep.config);
}

inline std::string svg_title(const EvaluationReport& rep, std::size_t column, std::size_t row) {
  const auto& r = rep.rows[row];
  return "K=" + std::to_string(r.k) + " " + to_string(rep.indices[column]) + "=" +
         (r.values[column] ? text::general(*r.values[column], 4) : std::string("NA")) +
         " AR=" + (r.ari ? text::fixed(*r.ari, 3) : std::string("NA"));
}

/// report.csv, summary.txt and, when enabled, top5_<index>_<rank>.svg.
inline void write_outputs(const std::filesystem::path& dir, const EvaluationReport& rep, const Dataset& data) {
  std::filesystem::create_directories(dir);
  {
    auto out = detail::open_out(dir / "report.csv");
    write_report_csv(out, rep);
  }
  {
    auto out = detail::open_out(dir / "summary.txt");
    write_summary(out, rep);
  }
  if (!rep.config.emit_svg) return;
  const std::size_t top = std::min(rep.config.top_n, rep.rows.size());
  for (std::size_t c = 0; c < rep.indices.size(); ++c) {
    for (std::size_t r = 0; r < top; ++r) {
      const auto row = rep.outcomes[c].order[r];
      const auto name = "top5_" + std::string(to_string(rep.indices[c])) + "_" + std::to_string(r + 1) + ".svg";
      emit_svg(data, rep.partitions[row], dir / name, svg_title(rep, c, row));
    }
  }
}

inline void write_accuracy_csv(std::ostream& o, const AccuracyTable& t) {
  o << "index,succeeded,total,accuracy\n";
  for (std::size_t c = 0; c < t.indices.size(); ++c) {
    o << to_string(t.indices[c]) << ',' << t.succeeded[c] << ',' << t.total << ',' << t.accuracy(c) << '\n';
  }
}

inline void write_grid_csv(std::ostream& o, const AccuracyTable& t) {
  o << "dataset";
  for (auto id : t.indices) o << ',' << to_string(id);
  o << '\n';
  for (std::size_t d = 0; d < t.dataset_ids.size(); ++d) {
    o << t.dataset_ids[d];
    for (bool ok : t.grid[d]) o << ',' << (ok ? 'S' : 'F');
    o << '\n';
  }
}

inline void write_accuracy_outputs(const std::filesystem::path& dir, const AccuracyTable& t) {
  std::filesystem::create_directories(dir);
  {
    auto out = detail::open_out(dir / "accuracy.csv");
    write_accuracy_csv(out, t);
  }
  auto out = detail::open_out(dir / "grid.csv");
  write_grid_csv(out, t);
}

}  // namespace kdeval

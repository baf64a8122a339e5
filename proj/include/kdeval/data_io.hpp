#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kdeval/rng.hpp"
#include "kdeval/text.hpp"

namespace kdeval {

/// Malformed or inconsistent input data. `line()` is 1-based, 0 when not tied to a line.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input contained no data rows.
class EmptyInputError : public DataError {
 public:
  explicit EmptyInputError(const std::string& what) : DataError(what) {}
};

/// Non-owning view of n points of dimension d stored row-major.
struct PointView {
  std::span<const double> coords;
  std::size_t dim = 0;

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> operator[](std::size_t i) const { return coords.subspan(i * dim, dim); }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

/// n points in d dimensions with optional reference labels. Immutable once built.
class Dataset {
 public:
  Dataset(std::string id, std::size_t dim, std::vector<double> coords,
          std::optional<std::vector<int>> labels = std::nullopt)
      : id_(std::move(id)), dim_(dim), coords_(std::move(coords)), labels_(std::move(labels)) {
    if (dim_ == 0) throw DataError("dataset '" + id_ + "': dimension must be at least 1");
    if (coords_.empty()) throw EmptyInputError("dataset '" + id_ + "' has no points");
    if (coords_.size() % dim_ != 0) throw DataError("dataset '" + id_ + "': ragged coordinates");
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (!std::isfinite(coords_[i])) {
        throw DataError("dataset '" + id_ + "': non-finite coordinate in point " +
                        std::to_string(i / dim_));
      }
    }
    if (labels_ && labels_->size() != size()) {
      throw DataError("dataset '" + id_ + "': " + std::to_string(labels_->size()) +
                      " labels for " + std::to_string(size()) + " points");
    }
  }

  const std::string& id() const { return id_; }
  std::size_t size() const { return coords_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(coords_).subspan(i * dim_, dim_);
  }
  const std::vector<double>& coords() const { return coords_; }
  PointView view() const { return {coords_, dim_}; }
  bool has_labels() const { return labels_.has_value(); }
  const std::optional<std::vector<int>>& labels() const { return labels_; }

  /// Copy with a different id and/or labels.
  Dataset with_labels(std::optional<std::vector<int>> labels) const {
    return Dataset(id_, dim_, coords_, std::move(labels));
  }

 private:
  std::string id_;
  std::size_t dim_;
  std::vector<double> coords_;
  std::optional<std::vector<int>> labels_;
};

/// Packs the selected rows into a contiguous row-major buffer.
inline std::vector<double> gather(PointView points, std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size() * points.dim);
  for (auto r : rows) {
    const auto p = points[r];
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

enum class FileFormat { csv, whitespace, arff };

/// .csv -> csv, .arff -> arff, anything else -> whitespace.
inline FileFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = text::lower(path.extension().string());
  if (ext == ".csv") return FileFormat::csv;
  if (ext == ".arff") return FileFormat::arff;
  return FileFormat::whitespace;
}

namespace detail {

/// First distinct raw label -> 0, second -> 1, ...
inline std::vector<int> remap_labels(const std::vector<std::string>& raw) {
  std::map<std::string, int> ids;
  std::vector<int> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    auto [it, inserted] = ids.try_emplace(r, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

inline bool is_missing(std::string_view tok) {
  tok = text::trim(tok);
  return tok.empty() || tok == "?" || text::iequals(tok, "na") || text::iequals(tok, "nan");
}

inline double parse_feature(std::string_view tok, std::size_t line) {
  if (is_missing(tok)) throw DataError("missing value", line);
  const auto v = text::parse_double(tok);
  if (!v) throw DataError("non-numeric feature '" + std::string(text::trim(tok)) + "'", line);
  if (!std::isfinite(*v)) throw DataError("non-finite feature", line);
  return *v;
}

inline std::string strip_quotes(std::string_view s) {
  s = text::trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

struct RowSink {
  std::vector<double> coords;
  std::vector<std::string> raw_labels;
  std::size_t width = 0;  // number of feature columns, fixed by the first row
};

inline void take_row(RowSink& sink, const std::vector<std::string_view>& fields,
                     std::optional<std::size_t> label_col, std::size_t line) {
  const std::size_t features = fields.size() - (label_col ? 1 : 0);
  if (sink.coords.empty() && sink.raw_labels.empty()) {
    if (features == 0) throw DataError("row has no feature columns", line);
    sink.width = features;
  } else if (features != sink.width) {
    throw DataError("ragged row: expected " + std::to_string(sink.width + (label_col ? 1 : 0)) +
                        " columns, found " + std::to_string(fields.size()),
                    line);
  }
  for (std::size_t c = 0; c < fields.size(); ++c) {
    if (label_col && c == *label_col) {
      if (is_missing(fields[c])) throw DataError("missing label", line);
      sink.raw_labels.emplace_back(text::trim(fields[c]));
    } else {
      sink.coords.push_back(parse_feature(fields[c], line));
    }
  }
}

inline std::optional<std::size_t> resolve_column(std::optional<int> col, std::size_t ncols,
                                                 std::size_t line) {
  if (!col) return std::nullopt;
  const long long c = *col < 0 ? static_cast<long long>(ncols) + *col : *col;
  if (c < 0 || c >= static_cast<long long>(ncols)) {
    throw DataError("label column " + std::to_string(*col) + " out of range for " +
                        std::to_string(ncols) + " columns",
                    line);
  }
  return static_cast<std::size_t>(c);
}

inline Dataset parse_delimited(std::string_view content, bool comma, std::optional<int> label_column,
                               const std::string& id) {
  RowSink sink;
  std::optional<std::size_t> label_col;
  std::size_t ncols = 0;
  std::size_t lineno = 0;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = text::trim(line);
    if (body.empty()) continue;
    auto fields = comma ? text::split(body, ',') : text::split_ws(body);
    if (ncols == 0) {
      ncols = fields.size();
      label_col = resolve_column(label_column, ncols, lineno);
    } else if (fields.size() != ncols) {
      throw DataError("ragged row: expected " + std::to_string(ncols) + " columns, found " +
                          std::to_string(fields.size()),
                      lineno);
    }
    take_row(sink, fields, label_col, lineno);
  }
  if (ncols == 0) throw EmptyInputError("'" + id + "' contains no data rows");
  std::optional<std::vector<int>> labels;
  if (label_col) labels = remap_labels(sink.raw_labels);
  return Dataset(id, sink.width, std::move(sink.coords), std::move(labels));
}

inline Dataset parse_arff(std::string_view content, const std::string& id) {
  enum class Kind { numeric, label };
  std::vector<Kind> attributes;
  std::optional<std::size_t> label_col;
  bool in_data = false;
  RowSink sink;
  std::size_t rows = 0;
  std::size_t lineno = 0;
  std::istringstream in{std::string(content)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '%') continue;
    if (!in_data) {
      if (text::starts_with_ci(line, "@relation")) continue;
      if (text::starts_with_ci(line, "@data")) {
        if (attributes.empty()) throw DataError("@data before any @attribute", lineno);
        in_data = true;
        continue;
      }
      if (!text::starts_with_ci(line, "@attribute")) {
        throw DataError("unexpected header line '" + std::string(line) + "'", lineno);
      }
      auto rest = text::trim(line.substr(10));
      std::string name;
      if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
        const auto close = rest.find(rest.front(), 1);
        if (close == std::string_view::npos) throw DataError("unterminated attribute name", lineno);
        name = std::string(rest.substr(1, close - 1));
        rest = text::trim(rest.substr(close + 1));
      } else {
        const auto sp = rest.find_first_of(" \t");
        if (sp == std::string_view::npos) throw DataError("attribute without type", lineno);
        name = std::string(rest.substr(0, sp));
        rest = text::trim(rest.substr(sp));
      }
      const bool nominal = !rest.empty() && rest.front() == '{';
      const auto type = text::lower(rest);
      const bool numeric = type == "numeric" || type == "real" || type == "integer";
      if (!nominal && !numeric) {
        throw DataError("unsupported attribute type '" + std::string(rest) + "'", lineno);
      }
      if (nominal || text::iequals(name, "class")) {
        if (label_col) throw DataError("more than one class attribute", lineno);
        label_col = attributes.size();
        attributes.push_back(Kind::label);
      } else {
        attributes.push_back(Kind::numeric);
      }
      continue;
    }
    if (line.front() == '{') throw DataError("sparse ARFF rows are not supported", lineno);
    auto fields = text::split(line, ',');
    if (fields.size() != attributes.size()) {
      throw DataError("ragged row: expected " + std::to_string(attributes.size()) +
                          " columns, found " + std::to_string(fields.size()),
                      lineno);
    }
    std::vector<std::string> unquoted;
    unquoted.reserve(fields.size());
    for (auto f : fields) unquoted.push_back(strip_quotes(f));
    std::vector<std::string_view> views(unquoted.begin(), unquoted.end());
    take_row(sink, views, label_col, lineno);
    ++rows;
  }
  if (!in_data) throw DataError("no @data section");
  if (rows == 0) throw EmptyInputError("'" + id + "' contains no data rows");
  std::optional<std::vector<int>> labels;
  if (label_col) labels = remap_labels(sink.raw_labels);
  return Dataset(id, sink.width, std::move(sink.coords), std::move(labels));
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Parses in-memory file content. `label_column` may be negative (counted from the end);
/// it is ignored for ARFF, where the nominal/`class` attribute supplies labels.
inline Dataset parse_dataset(std::string_view content, FileFormat format,
                             std::optional<int> label_column = std::nullopt,
                             const std::string& id = "data") {
  switch (format) {
    case FileFormat::csv:
      return detail::parse_delimited(content, true, label_column, id);
    case FileFormat::whitespace:
      return detail::parse_delimited(content, false, label_column, id);
    case FileFormat::arff:
      return detail::parse_arff(content, id);
  }
  throw DataError("unknown format");
}

/// Loads a dataset file; the id is the file stem.
inline Dataset load_dataset(const std::filesystem::path& path, FileFormat format,
                            std::optional<int> label_column = std::nullopt) {
  return parse_dataset(detail::slurp(path), format, label_column, path.stem().string());
}

/// One raw label per line, remapped by first occurrence.
inline std::vector<int> load_labels(const std::filesystem::path& path) {
  const auto content = detail::slurp(path);
  std::vector<std::string> raw;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (!t.empty()) raw.emplace_back(t);
  }
  if (raw.empty()) throw EmptyInputError("'" + path.string() + "' contains no labels");
  return detail::remap_labels(raw);
}

/// Headerless CSV, shortest round-trip number formatting; labels (if any) as the last column.
inline void write_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) out << ',';
      out << text::exact(p[k]);
    }
    if (data.labels()) out << ',' << (*data.labels())[i];
    out << '\n';
  }
}

inline void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(out, data);
}

/// Isotropic Gaussian blobs; labels are the generating component.
inline Dataset make_blobs(std::size_t per_cluster, const std::vector<std::vector<double>>& centers,
                          double sigma, std::uint64_t seed, std::string id = "blobs") {
  if (centers.empty()) throw std::invalid_argument("make_blobs: need at least one center");
  if (per_cluster == 0) throw std::invalid_argument("make_blobs: per_cluster must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("make_blobs: sigma must be positive");
  const std::size_t dim = centers.front().size();
  for (const auto& c : centers) {
    if (c.size() != dim || dim == 0) throw DataError("make_blobs: centers differ in dimension");
  }
  Rng rng(seed);
  std::vector<double> coords;
  std::vector<int> labels;
  coords.reserve(centers.size() * per_cluster * dim);
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (std::size_t i = 0; i < per_cluster; ++i) {
      for (std::size_t k = 0; k < dim; ++k) coords.push_back(centers[c][k] + sigma * rng.normal());
      labels.push_back(static_cast<int>(c));
    }
  }
  return Dataset(std::move(id), dim, std::move(coords), std::move(labels));
}

}  // namespace kdeval

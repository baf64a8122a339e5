#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "kdeval/data_io.hpp"
#include "kdeval/partition.hpp"
#include "kdeval/text.hpp"

namespace kdeval {

// 30 fixed fills; cluster q uses kPalette[q % 30].
inline constexpr std::array<const char*, 30> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173", "#3182bd",
    "#e6550d", "#31a354", "#756bb1", "#636363", "#9c9ede", "#cedb9c", "#e7ba52", "#e7969c",
    "#de9ed6", "#6baed6", "#fd8d3c", "#74c476", "#9e9ac8", "#969696"};

struct SvgOptions {
  int width = 480;
  int height = 480;
  int margin = 36;
  double radius = 2.5;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Scatter of the first two coordinates (1-D data drawn on a line), one fill per cluster.
inline std::string render_svg(const Dataset& data, const Partition& partition, std::string_view title,
                              const SvgOptions& opt = {}) {
  if (partition.size() != data.size()) throw std::invalid_argument("render_svg: partition/data size mismatch");
  const bool has_y = data.dim() >= 2;
  double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double hi[2] = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    for (int a = 0; a < 2; ++a) {
      const double v = a == 0 || has_y ? p[static_cast<std::size_t>(a)] : 0.0;
      lo[a] = std::min(lo[a], v);
      hi[a] = std::max(hi[a], v);
    }
  }
  const double plot_w = opt.width - 2.0 * opt.margin;
  const double plot_h = opt.height - 2.0 * opt.margin;
  auto to_px = [&](double v, int a) {
    const double span = hi[a] - lo[a];
    const double t = span > 0.0 ? (v - lo[a]) / span : 0.5;
    return a == 0 ? opt.margin + t * plot_w : opt.height - opt.margin - t * plot_h;
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
    << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  o << "<text x=\"" << opt.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\">"
    << detail::xml_escape(title) << "</text>\n";
  if (data.dim() > 2) {
    o << "<text x=\"" << opt.width / 2 << "\" y=\"" << opt.height - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << data.dim()
      << "-D data projected onto the first two axes</text>\n";
  }
  o << "<rect x=\"" << opt.margin << "\" y=\"" << opt.margin << "\" width=\"" << plot_w << "\" height=\""
    << plot_h << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
  const auto& labels = partition.labels();
  const auto r = text::general(opt.radius, 6);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    const double x = to_px(p[0], 0);
    const double y = to_px(has_y ? p[1] : 0.0, 1);
    o << "<circle cx=\"" << text::fixed(x, 2) << "\" cy=\"" << text::fixed(y, 2) << "\" r=\"" << r
      << "\" fill=\"" << kPalette[static_cast<std::size_t>(labels[i]) % kPalette.size()] << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void emit_svg(const Dataset& data, const Partition& partition, const std::filesystem::path& path,
                     std::string_view title, const SvgOptions& opt = {}) {
  const auto body = render_svg(data, partition, title, opt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace kdeval

// Copyright 2026 The profilekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "profilekit/error.hpp"
#include "profilekit/logstore.hpp"

namespace profilekit {

namespace plot {
inline constexpr std::string_view kModule = "plot";
[[noreturn]] inline void fail(const std::string& message) { throw Error(kModule, message); }
}  // namespace plot

enum class PlotKind { kCurve, kStackplot, kPie, kHeatmap, kScatter };

struct PlotSpec {
  PlotKind kind = PlotKind::kCurve;
  int width = 640;
  int height = 400;
  std::size_t top_k = 5;
  std::string title;

  void validate() const {
    if (width <= 0 || height <= 0) plot::fail("plot dimensions must be positive");
    if (top_k < 1) plot::fail("top_k must be at least 1");
  }
};

inline PlotKind parse_plot_kind(std::string_view s) {
  if (s == "curve") return PlotKind::kCurve;
  if (s == "stackplot") return PlotKind::kStackplot;
  if (s == "pie") return PlotKind::kPie;
  if (s == "heatmap") return PlotKind::kHeatmap;
  if (s == "scatter") return PlotKind::kScatter;
  plot::fail("unknown plot kind '" + std::string(s) + "'");
}

inline PlotSpec plot_spec_from_json(const nlohmann::json& j) {
  try {
    PlotSpec spec;
    spec.kind = parse_plot_kind(j.at("kind").get<std::string>());
    spec.width = j.value("width", spec.width);
    spec.height = j.value("height", spec.height);
    spec.top_k = j.value("top_k", spec.top_k);
    spec.title = j.value("title", std::string());
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    plot::fail(std::string("malformed plot spec: ") + e.what());
  }
}

/// A parsed CSV: header row plus string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline Table parse_csv(std::istream& in) {
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const auto text = logstore::detail::trim(line);
    if (text.empty()) continue;
    std::vector<std::string> cells;
    for (auto f : logstore::detail::split(text, ',')) cells.emplace_back(logstore::detail::trim(f));
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size()) plot::fail("CSV row width differs from its header");
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) plot::fail("CSV data is empty");
  return t;
}

namespace plot::detail {

struct Frame {
  double left, top, width, height;
};

inline Frame frame_for(const PlotSpec& spec) {
  const double w = std::max(1.0, spec.width - 72.0);
  const double h = std::max(1.0, spec.height - 68.0);
  return {56.0, 28.0, w, h};
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr std::array<const char*, 10> kPalette = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                                         "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

inline double parse_cell(const std::string& cell) {
  double v = 0.0;
  if (!logstore::detail::parse_number(std::string_view(cell), v) || !std::isfinite(v)) {
    fail("non-numeric cell '" + cell + "'");
  }
  return v;
}

inline std::vector<std::vector<double>> numeric_columns(const Table& t, std::size_t from) {
  std::vector<std::vector<double>> cols(t.header.size() - from);
  for (const auto& row : t.rows) {
    for (std::size_t c = from; c < t.header.size(); ++c) cols[c - from].push_back(parse_cell(row[c]));
  }
  return cols;
}

inline void open(std::ostringstream& out, const PlotSpec& spec) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height << "\" fill=\"#ffffff\"/>\n";
  if (!spec.title.empty()) {
    out << "<text x=\"" << num(spec.width / 2.0) << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"14\">" << escape(spec.title) << "</text>\n";
  }
}

inline void axes(std::ostringstream& out, const Frame& f, double x0, double x1, double y0, double y1) {
  out << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.width) << "\" height=\""
      << num(f.height) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  const double bottom = f.top + f.height;
  out << "<text x=\"" << num(f.left) << "\" y=\"" << num(bottom + 16) << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\" text-anchor=\"middle\">" << label(x0) << "</text>\n";
  out << "<text x=\"" << num(f.left + f.width) << "\" y=\"" << num(bottom + 16) << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\" text-anchor=\"middle\">" << label(x1) << "</text>\n";
  out << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(bottom) << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\" text-anchor=\"end\">" << label(y0) << "</text>\n";
  out << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(f.top + 4) << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\" text-anchor=\"end\">" << label(y1) << "</text>\n";
}

struct Range {
  double lo, hi;
};

inline Range range_of(const std::vector<std::vector<double>>& cols, bool unit_if_fits) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& c : cols) {
    for (double v : c) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (unit_if_fits && lo >= 0.0 && hi <= 1.0) return {0.0, 1.0};
  if (!(hi > lo)) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

inline double map(double v, Range r, double start, double length) { return start + (v - r.lo) / (r.hi - r.lo) * length; }

}  // namespace plot::detail

/// Cumulative band boundaries of a stackplot: the top_k channels by mean
/// probability (descending, ties to the lower column), then an "other" band
/// for the rest. Each row is renormalized so the last boundary is 1.
struct StackBands {
  std::vector<double> p;
  std::vector<std::string> names;
  std::vector<std::vector<double>> upper;  // upper[band][i], non-decreasing over bands
};

inline StackBands stack_bands(const Table& t, std::size_t top_k) {
  if (t.header.size() < 2 || t.header[0] != "p") plot::fail("stackplot data must have columns p,class_0,...");
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    if (t.header[c].rfind("class_", 0) != 0) plot::fail("stackplot data must have columns p,class_0,...");
  }
  if (t.rows.empty()) plot::fail("stackplot data has no rows");
  const auto cols = plot::detail::numeric_columns(t, 1);
  StackBands out;
  for (const auto& row : t.rows) out.p.push_back(plot::detail::parse_cell(row[0]));
  const std::size_t channels = cols.size();
  std::vector<double> mean(channels);
  for (std::size_t c = 0; c < channels; ++c) mean[c] = std::accumulate(cols[c].begin(), cols[c].end(), 0.0);
  std::vector<std::size_t> order(channels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean[a] > mean[b]; });
  const std::size_t named = std::min(top_k, channels);
  const std::size_t rows = out.p.size();
  std::vector<std::vector<double>> bands;
  for (std::size_t b = 0; b < named; ++b) {
    out.names.push_back(t.header[order[b] + 1]);
    bands.push_back(cols[order[b]]);
  }
  if (channels > named) {
    std::vector<double> other(rows, 0.0);
    for (std::size_t b = named; b < channels; ++b) {
      for (std::size_t i = 0; i < rows; ++i) other[i] += cols[order[b]][i];
    }
    out.names.push_back("other");
    bands.push_back(std::move(other));
  }
  out.upper.assign(bands.size(), std::vector<double>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    double total = 0.0;
    for (const auto& b : bands) {
      if (b[i] < 0.0) plot::fail("stackplot data has a negative probability");
      total += b[i];
    }
    if (!(total > 0.0)) plot::fail("stackplot row has zero total probability");
    double acc = 0.0;
    for (std::size_t b = 0; b < bands.size(); ++b) {
      acc += bands[b][i] / total;
      out.upper[b][i] = acc;
    }
    out.upper.back()[i] = 1.0;
  }
  return out;
}

/// Renders one self-contained SVG. Output bytes depend only on the inputs.
inline std::string emit_svg(const PlotSpec& spec, const Table& t) {
  using namespace plot::detail;
  spec.validate();
  std::ostringstream out;
  const Frame f = frame_for(spec);
  switch (spec.kind) {
    case PlotKind::kCurve: {
      if (t.header.size() < 2 || t.header[0] != "p") plot::fail("curve data must have columns p,value,...");
      if (t.rows.empty()) plot::fail("curve data has no rows");
      const auto xs = numeric_columns(t, 0).front();
      const auto ys = numeric_columns(t, 1);
      const Range xr = range_of({xs}, false);
      const Range yr = range_of(ys, true);
      open(out, spec);
      axes(out, f, xr.lo, xr.hi, yr.lo, yr.hi);
      for (std::size_t s = 0; s < ys.size(); ++s) {
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % kPalette.size()] << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
          if (i) out << ' ';
          out << num(map(xs[i], xr, f.left, f.width)) << ',' << num(map(ys[s][i], yr, f.top + f.height, -f.height));
        }
        out << "\"/>\n";
      }
      break;
    }
    case PlotKind::kStackplot: {
      const StackBands bands = stack_bands(t, spec.top_k);
      const Range xr = range_of({bands.p}, false);
      open(out, spec);
      for (std::size_t b = 0; b < bands.upper.size(); ++b) {
        const std::vector<double> zero(bands.p.size(), 0.0);
        const auto& lower = b == 0 ? zero : bands.upper[b - 1];
        const auto& upper = bands.upper[b];
        bool visible = false;
        for (std::size_t i = 0; i < upper.size(); ++i) visible = visible || upper[i] > lower[i];
        if (!visible) continue;
        const char* color = bands.names[b] == "other" ? "#cccccc" : kPalette[b % kPalette.size()];
        out << "<polygon fill=\"" << color << "\" stroke=\"none\" data-band=\"" << escape(bands.names[b]) << "\" points=\"";
        for (std::size_t i = 0; i < upper.size(); ++i) {
          out << num(map(bands.p[i], xr, f.left, f.width)) << ',' << num(f.top + f.height * (1.0 - upper[i])) << ' ';
        }
        for (std::size_t i = upper.size(); i-- > 0;) {
          out << num(map(bands.p[i], xr, f.left, f.width)) << ',' << num(f.top + f.height * (1.0 - lower[i]));
          if (i) out << ' ';
        }
        out << "\"/>\n";
      }
      axes(out, f, xr.lo, xr.hi, 0.0, 1.0);
      break;
    }
    case PlotKind::kPie: {
      if (t.header.size() != 2 || t.header[1] != "count") plot::fail("pie data must have columns label,count");
      std::vector<std::pair<std::string, double>> slices;
      double total = 0.0;
      for (const auto& row : t.rows) {
        const double v = parse_cell(row[1]);
        if (v < 0.0) plot::fail("pie counts must be non-negative");
        total += v;
        if (v > 0.0) slices.emplace_back(row[0], v);
      }
      if (!(total > 0.0)) plot::fail("pie counts sum to zero");
      open(out, spec);
      const double cx = spec.width / 2.0;
      const double cy = f.top + f.height / 2.0;
      const double r = std::min(f.width, f.height) / 2.0;
      if (slices.size() == 1) {
        out << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r) << "\" fill=\"" << kPalette[0]
            << "\" data-slice=\"" << escape(slices[0].first) << "\"/>\n";
      } else {
        double angle = -std::numbers::pi / 2.0;
        for (std::size_t s = 0; s < slices.size(); ++s) {
          const double sweep = 2.0 * std::numbers::pi * slices[s].second / total;
          const double end = angle + sweep;
          out << "<path fill=\"" << kPalette[s % kPalette.size()] << "\" data-slice=\"" << escape(slices[s].first)
              << "\" d=\"M " << num(cx) << ',' << num(cy) << " L " << num(cx + r * std::cos(angle)) << ','
              << num(cy + r * std::sin(angle)) << " A " << num(r) << ',' << num(r) << " 0 "
              << (sweep > std::numbers::pi ? 1 : 0) << ",1 " << num(cx + r * std::cos(end)) << ','
              << num(cy + r * std::sin(end)) << " Z\"/>\n";
          angle = end;
        }
      }
      for (std::size_t s = 0; s < slices.size(); ++s) {
        out << "<text x=\"8\" y=\"" << num(40.0 + 14.0 * static_cast<double>(s)) << "\" font-family=\"sans-serif\" "
            << "font-size=\"11\" fill=\"" << kPalette[s % kPalette.size()] << "\">" << escape(slices[s].first) << ": "
            << label(slices[s].second) << "</text>\n";
      }
      break;
    }
    case PlotKind::kHeatmap: {
      const std::size_t n = t.rows.size();
      if (n == 0 || t.header.size() != n + 1 || !t.header[0].empty()) {
        plot::fail("heatmap data must be a square matrix with a name header row and name column");
      }
      const auto cols = numeric_columns(t, 1);
      const Range vr = range_of(cols, false);
      const double lo = std::min(vr.lo, 0.0);
      const double hi = std::max(vr.hi, lo + 1e-12);
      open(out, spec);
      const double cw = f.width / static_cast<double>(n);
      const double ch = f.height / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double v = cols[j][i];
          const double s = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
          const int red = static_cast<int>(std::lround(255.0 + s * (33.0 - 255.0)));
          const int green = static_cast<int>(std::lround(255.0 + s * (102.0 - 255.0)));
          const int blue = static_cast<int>(std::lround(255.0 + s * (172.0 - 255.0)));
          char color[16];
          std::snprintf(color, sizeof(color), "#%02x%02x%02x", red, green, blue);
          const double x = f.left + cw * static_cast<double>(j);
          const double y = f.top + ch * static_cast<double>(i);
          out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cw) << "\" height=\"" << num(ch)
              << "\" fill=\"" << color << "\"/>\n";
          char text[32];
          std::snprintf(text, sizeof(text), "%.3f", v);
          out << "<text x=\"" << num(x + cw / 2) << "\" y=\"" << num(y + ch / 2 + 4) << "\" text-anchor=\"middle\" "
              << "font-family=\"sans-serif\" font-size=\"11\" fill=\"" << (s > 0.6 ? "#ffffff" : "#000000") << "\">"
              << text << "</text>\n";
        }
        out << "<text x=\"" << num(f.left - 4) << "\" y=\"" << num(f.top + ch * (static_cast<double>(i) + 0.5) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << escape(t.rows[i][0])
            << "</text>\n";
        out << "<text x=\"" << num(f.left + cw * (static_cast<double>(i) + 0.5)) << "\" y=\"" << num(f.top + f.height + 16)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << escape(t.header[i + 1])
            << "</text>\n";
      }
      break;
    }
    case PlotKind::kScatter: {
      if (t.header.size() != 2) plot::fail("scatter data must have exactly two numeric columns");
      if (t.rows.empty()) plot::fail("scatter data has no rows");
      const auto cols = numeric_columns(t, 0);
      const Range xr = range_of({cols[0]}, false);
      const Range yr = range_of({cols[1]}, true);
      open(out, spec);
      axes(out, f, xr.lo, xr.hi, yr.lo, yr.hi);
      for (std::size_t i = 0; i < cols[0].size(); ++i) {
        out << "<circle cx=\"" << num(map(cols[0][i], xr, f.left, f.width)) << "\" cy=\""
            << num(map(cols[1][i], yr, f.top + f.height, -f.height)) << "\" r=\"3\" fill=\"" << kPalette[0]
            << "\" fill-opacity=\"0.7\"/>\n";
      }
      break;
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace profilekit

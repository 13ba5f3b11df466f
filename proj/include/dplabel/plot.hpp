// Copyright 2026 The dplabel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Standalone SVG rendering of sweep results: one log-log panel per epsilon,
// one polyline (mean l2 error against n) per estimator.

#ifndef DPLABEL_PLOT_HPP_
#define DPLABEL_PLOT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dplabel/errors.hpp"
#include "dplabel/experiment.hpp"
#include "dplabel/metrics.hpp"

namespace dplabel {

struct PlotSpec {
  std::string title = "Mean l2 estimation error";
  double panel_width = 420.0;
  double panel_height = 320.0;
};

namespace detail {

inline std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string svg_escape(const std::string& s) {
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

inline std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct LogAxis {
  double lo, hi;  // log10 bounds

  static LogAxis covering(double min_value, double max_value) {
    double lo = std::log10(min_value), hi = std::log10(max_value);
    if (hi - lo < 1e-9) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.06 * (hi - lo);
    return {lo - pad, hi + pad};
  }
  double frac(double v) const { return (std::log10(v) - lo) / (hi - lo); }

  // Decades inside the range, or the two ends when no decade falls inside.
  std::vector<double> ticks() const {
    std::vector<double> t;
    for (double e = std::ceil(lo); e <= std::floor(hi); e += 1.0) t.push_back(std::pow(10.0, e));
    if (t.empty()) t = {std::pow(10.0, lo), std::pow(10.0, hi)};
    return t;
  }
};

inline const char* series_color(std::size_t i) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#17becf"};
  return kPalette[i % 6];
}

}  // namespace detail

// Renders the document. Throws DomainError when there are no records.
inline std::string render_svg(std::span<const ErrorRecord> records, const PlotSpec& spec = {}) {
  if (records.empty()) throw DomainError("emit_svg: no data rows");
  const auto groups = group_l2_errors(records);

  std::set<double> epsilons;
  std::set<std::string> estimators;
  for (const auto& r : records) {
    epsilons.insert(r.epsilon);
    estimators.insert(r.estimator);
  }
  const std::vector<std::string> names(estimators.begin(), estimators.end());

  const double W = spec.panel_width, H = spec.panel_height;
  const double left = 64, right = 120, top = 34, bottom = 46;
  const double total_w = W * static_cast<double>(epsilons.size());
  const double total_h = H + 30;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_number(total_w) +
         "\" height=\"" + detail::svg_number(total_h) + "\" viewBox=\"0 0 " +
         detail::svg_number(total_w) + " " + detail::svg_number(total_h) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::svg_number(total_w / 2) +
         "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" +
         detail::svg_escape(spec.title) + "</text>\n";

  std::size_t panel = 0;
  for (double eps : epsilons) {
    // Per-estimator (n, mean error) points for this panel.
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    double nmin = INFINITY, nmax = 0, emin = INFINITY, emax = 0;
    for (const auto& [key, errs] : groups) {
      const auto& [name, e, n] = key;
      if (e != eps) continue;
      double mean = summarize(errs).mean;
      mean = std::max(mean, 1e-300);
      series[name].emplace_back(static_cast<double>(n), mean);
      nmin = std::min(nmin, static_cast<double>(n));
      nmax = std::max(nmax, static_cast<double>(n));
      emin = std::min(emin, mean);
      emax = std::max(emax, mean);
    }
    const auto xa = detail::LogAxis::covering(nmin, nmax);
    const auto ya = detail::LogAxis::covering(emin, emax);
    const double x0 = static_cast<double>(panel) * W + left;
    const double pw = W - left - right, ph = H - top - bottom;
    const double y0 = 30 + top;
    auto px = [&](double n) { return x0 + xa.frac(n) * pw; };
    auto py = [&](double err) { return y0 + (1.0 - ya.frac(err)) * ph; };

    svg += "<g class=\"panel\" data-epsilon=\"" + detail::short_real(eps) + "\">\n";
    svg += "<text x=\"" + detail::svg_number(x0 + pw / 2) + "\" y=\"" +
           detail::svg_number(y0 - 8) + "\" text-anchor=\"middle\">epsilon = " +
           detail::short_real(eps) + "</text>\n";
    svg += "<rect x=\"" + detail::svg_number(x0) + "\" y=\"" + detail::svg_number(y0) +
           "\" width=\"" + detail::svg_number(pw) + "\" height=\"" + detail::svg_number(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : xa.ticks()) {
      const double x = px(t);
      svg += "<line x1=\"" + detail::svg_number(x) + "\" y1=\"" + detail::svg_number(y0 + ph) +
             "\" x2=\"" + detail::svg_number(x) + "\" y2=\"" + detail::svg_number(y0 + ph + 4) +
             "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + detail::svg_number(x) + "\" y=\"" + detail::svg_number(y0 + ph + 16) +
             "\" text-anchor=\"middle\">" + detail::short_real(t) + "</text>\n";
    }
    for (double t : ya.ticks()) {
      const double y = py(t);
      svg += "<line x1=\"" + detail::svg_number(x0 - 4) + "\" y1=\"" + detail::svg_number(y) +
             "\" x2=\"" + detail::svg_number(x0) + "\" y2=\"" + detail::svg_number(y) +
             "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + detail::svg_number(x0 - 6) + "\" y=\"" + detail::svg_number(y + 4) +
             "\" text-anchor=\"end\">" + detail::short_real(t) + "</text>\n";
    }
    svg += "<text x=\"" + detail::svg_number(x0 + pw / 2) + "\" y=\"" +
           detail::svg_number(y0 + ph + 34) + "\" text-anchor=\"middle\">n (log scale)</text>\n";
    svg += "<text transform=\"translate(" + detail::svg_number(x0 - 48) + "," +
           detail::svg_number(y0 + ph / 2) +
           ") rotate(-90)\" text-anchor=\"middle\">mean l2 error (log scale)</text>\n";

    std::size_t legend_row = 0;
    for (std::size_t s = 0; s < names.size(); ++s) {
      const auto it = series.find(names[s]);
      if (it == series.end()) continue;
      auto pts = it->second;
      std::sort(pts.begin(), pts.end());
      const char* color = detail::series_color(s);
      std::string coords;
      for (const auto& [n, err] : pts) {
        if (!coords.empty()) coords += ' ';
        coords += detail::svg_number(px(n)) + "," + detail::svg_number(py(err));
      }
      svg += "<polyline class=\"series\" data-estimator=\"" + detail::svg_escape(names[s]) +
             "\" points=\"" + coords + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
      for (const auto& [n, err] : pts)
        svg += "<circle class=\"marker\" cx=\"" + detail::svg_number(px(n)) + "\" cy=\"" +
               detail::svg_number(py(err)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";

      const double ly = y0 + 10 + 16 * static_cast<double>(legend_row++);
      const double lx = x0 + pw + 10;
      svg += "<g class=\"legend\"><line x1=\"" + detail::svg_number(lx) + "\" y1=\"" +
             detail::svg_number(ly) + "\" x2=\"" + detail::svg_number(lx + 18) + "\" y2=\"" +
             detail::svg_number(ly) + "\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/><text x=\"" + detail::svg_number(lx + 22) + "\" y=\"" +
             detail::svg_number(ly + 4) + "\">" + detail::svg_escape(names[s]) +
             "</text></g>\n";
    }
    svg += "</g>\n";
    ++panel;
  }
  svg += "</svg>\n";
  return svg;
}

// Writes the SVG for `records` to `out_path`. Nothing is written on error.
inline void emit_svg(std::span<const ErrorRecord> records, const std::string& out_path,
                     const PlotSpec& spec = {}) {
  const std::string doc = render_svg(records, spec);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + out_path + "'");
  out << doc;
  if (!out) throw IoError("failed writing '" + out_path + "'");
}

inline void emit_svg(const std::string& csv_path, const std::string& out_path,
                     const PlotSpec& spec = {}) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open '" + csv_path + "'");
  const auto records = read_results_csv(in);
  emit_svg(records, out_path, spec);
}

}  // namespace dplabel

#endif  // DPLABEL_PLOT_HPP_

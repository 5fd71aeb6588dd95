// Minimal SVG line charts: one panel per group, a mean line per series and
// a translucent min-max band around it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace traje::svg
{

struct Series
{
  std::string label;
  std::vector<double> mean, lo, hi;
};

struct Panel
{
  std::string title;
  std::vector<Series> series;
};

namespace detail
{

inline std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

inline const char* color(std::size_t i)
{
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  return palette[i % 6];
}

}  // namespace detail

/// x values are categorical and evenly spaced, labelled by `x_ticks`.
inline std::string line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<std::string>& x_ticks,
                              const std::vector<Panel>& panels)
{
  const double pw = 320, ph = 240, ml = 60, mr = 20, mt = 50, mb = 70;
  const double width = ml + panels.size() * (pw + mr) + 10;
  const double height = mt + ph + mb;

  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const auto& p : panels) {
    for (const auto& s : p.series) {
      for (double v : s.lo) {
        y_min = std::min(y_min, v);
      }
      for (double v : s.hi) {
        y_max = std::max(y_max, v);
      }
    }
  }
  if (!std::isfinite(y_min) || !std::isfinite(y_max)) {
    y_min = 0.0;
    y_max = 1.0;
  }
  if (y_max - y_min < 1e-12) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  const std::size_t nx = x_ticks.size();
  auto px = [&](std::size_t panel, std::size_t i) {
    const double x0 = ml + panel * (pw + mr);
    return nx <= 1 ? x0 + pw / 2 : x0 + pw * (0.05 + 0.9 * i / (nx - 1.0));
  };
  auto py = [&](double v) { return mt + ph * (1.0 - (v - y_min) / (y_max - y_min)); };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(width) + "\" height=\"" +
       detail::num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + detail::num(width / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       detail::escape(title) + "</text>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double x0 = ml + p * (pw + mr);
    o += "<g class=\"panel\">\n";
    o += "<rect x=\"" + detail::num(x0) + "\" y=\"" + detail::num(mt) + "\" width=\"" +
         detail::num(pw) + "\" height=\"" + detail::num(ph) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
    o += "<text x=\"" + detail::num(x0 + pw / 2) + "\" y=\"" + detail::num(mt - 8) +
         "\" text-anchor=\"middle\">" + detail::escape(panels[p].title) + "</text>\n";
    for (int k = 0; k <= 4; ++k) {
      const double v = y_min + (y_max - y_min) * k / 4.0;
      o += "<line x1=\"" + detail::num(x0) + "\" x2=\"" + detail::num(x0 + pw) + "\" y1=\"" +
           detail::num(py(v)) + "\" y2=\"" + detail::num(py(v)) + "\" stroke=\"#ddd\"/>\n";
      if (p == 0) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        o += "<text x=\"" + detail::num(x0 - 4) + "\" y=\"" + detail::num(py(v) + 4) +
             "\" text-anchor=\"end\">" + buf + "</text>\n";
      }
    }
    for (std::size_t i = 0; i < nx; ++i) {
      o += "<text x=\"" + detail::num(px(p, i)) + "\" y=\"" + detail::num(mt + ph + 15) +
           "\" text-anchor=\"middle\">" + detail::escape(x_ticks[i]) + "</text>\n";
    }
    o += "<text x=\"" + detail::num(x0 + pw / 2) + "\" y=\"" + detail::num(mt + ph + 32) +
         "\" text-anchor=\"middle\">" + detail::escape(x_label) + "</text>\n";

    for (std::size_t s = 0; s < panels[p].series.size(); ++s) {
      const Series& se = panels[p].series[s];
      const std::size_t n = std::min({nx, se.mean.size(), se.lo.size(), se.hi.size()});
      std::string band, line;
      for (std::size_t i = 0; i < n; ++i) {
        band += detail::num(px(p, i)) + "," + detail::num(py(se.hi[i])) + " ";
      }
      for (std::size_t i = n; i-- > 0;) {
        band += detail::num(px(p, i)) + "," + detail::num(py(se.lo[i])) + " ";
      }
      for (std::size_t i = 0; i < n; ++i) {
        line += detail::num(px(p, i)) + "," + detail::num(py(se.mean[i])) + " ";
      }
      o += "<polygon class=\"band\" points=\"" + band + "\" fill=\"" + detail::color(s) +
           "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
      o += "<polyline class=\"mean\" points=\"" + line + "\" fill=\"none\" stroke=\"" +
           detail::color(s) + "\" stroke-width=\"2\"/>\n";
      const double ly = mt + ph + 48;
      const double lx = x0 + 10 + 100.0 * s;
      o += "<line x1=\"" + detail::num(lx) + "\" x2=\"" + detail::num(lx + 18) + "\" y1=\"" +
           detail::num(ly) + "\" y2=\"" + detail::num(ly) + "\" stroke=\"" + detail::color(s) +
           "\" stroke-width=\"2\"/>\n";
      o += "<text x=\"" + detail::num(lx + 22) + "\" y=\"" + detail::num(ly + 4) + "\">" +
           detail::escape(se.label) + "</text>\n";
    }
    o += "</g>\n";
  }
  o += "<text transform=\"translate(14," + detail::num(mt + ph / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + detail::escape(y_label) + "</text>\n";
  o += "</svg>\n";
  return o;
}

}  // namespace traje::svg

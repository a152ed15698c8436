#include "membrane/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace membrane {
namespace {

std::string num(double v, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      // Degenerate span: open a unit window around the value.
      const double c = std::isfinite(lo) ? lo : 0.0;
      lo = c - 1.0;
      hi = c + 1.0;
      return;
    }
    const double p = 0.05 * (hi - lo);
    lo -= p;
    hi += p;
  }
};

/// Maps data coordinates into one panel's pixel box.
struct Panel {
  double px, py, pw, ph;  // pixel box (top-left origin)
  Range x, y;

  double sx(double v) const { return px + (v - x.lo) / (x.hi - x.lo) * pw; }
  double sy(double v) const { return py + ph - (v - y.lo) / (y.hi - y.lo) * ph; }
};

void draw_axes(std::string& svg, const Panel& p, const std::string& x_label,
               const std::string& y_label) {
  svg += "<rect x=\"" + num(p.px) + "\" y=\"" + num(p.py) + "\" width=\"" +
         num(p.pw) + "\" height=\"" + num(p.ph) +
         "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = p.x.lo + (p.x.hi - p.x.lo) * i / 5.0;
    const double fy = p.y.lo + (p.y.hi - p.y.lo) * i / 5.0;
    const double gx = p.sx(fx);
    const double gy = p.sy(fy);
    svg += "<line x1=\"" + num(gx) + "\" y1=\"" + num(p.py + p.ph) + "\" x2=\"" +
           num(gx) + "\" y2=\"" + num(p.py + p.ph + 5) +
           "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(gx) + "\" y=\"" + num(p.py + p.ph + 18) +
           "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">" +
           num(fx, "%.4g") + "</text>\n";
    svg += "<line x1=\"" + num(p.px - 5) + "\" y1=\"" + num(gy) + "\" x2=\"" +
           num(p.px) + "\" y2=\"" + num(gy) +
           "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(p.px - 8) + "\" y=\"" + num(gy + 4) +
           "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333\">" +
           num(fy, "%.4g") + "</text>\n";
  }
  svg += "<text x=\"" + num(p.px + p.pw / 2) + "\" y=\"" +
         num(p.py + p.ph + 36) +
         "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111\">" +
         escape_xml(x_label) + "</text>\n";
  svg += "<text x=\"" + num(p.px - 48) + "\" y=\"" + num(p.py + p.ph / 2) +
         "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111\" transform=\"rotate(-90 " +
         num(p.px - 48) + " " + num(p.py + p.ph / 2) + ")\">" +
         escape_xml(y_label) + "</text>\n";
}

void draw_scatter_panel(std::string& svg, Panel& p,
                        const std::vector<TrendSeries>& series,
                        const std::string& title, const std::string& x_label,
                        const std::string& y_label) {
  for (const TrendSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      p.x.include(x);
      p.y.include(y);
    }
  }
  p.x.pad();
  for (const TrendSeries& s : series) {
    if (s.has_line) {
      p.y.include(s.slope * p.x.lo + s.intercept);
      p.y.include(s.slope * p.x.hi + s.intercept);
    }
  }
  p.y.pad();

  draw_axes(svg, p, x_label, y_label);
  svg += "<text x=\"" + num(p.px) + "\" y=\"" + num(p.py - 10) +
         "\" font-size=\"14\" fill=\"#111\">" + escape_xml(title) + "</text>\n";
  double legend_x = p.px + p.pw - 150;
  double legend_y = p.py + 14;
  for (const TrendSeries& s : series) {
    if (s.has_line) {
      svg += "<line class=\"trend\" x1=\"" + num(p.sx(p.x.lo)) + "\" y1=\"" +
             num(p.sy(s.slope * p.x.lo + s.intercept)) + "\" x2=\"" +
             num(p.sx(p.x.hi)) + "\" y2=\"" +
             num(p.sy(s.slope * p.x.hi + s.intercept)) + "\" stroke=\"" +
             s.color + "\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\"/>\n";
    }
    for (const auto& [x, y] : s.points) {
      svg += "<circle cx=\"" + num(p.sx(x)) + "\" cy=\"" + num(p.sy(y)) +
             "\" r=\"4\" fill=\"" + s.color + "\" fill-opacity=\"0.85\"/>\n";
    }
    svg += "<rect x=\"" + num(legend_x) + "\" y=\"" + num(legend_y - 9) +
           "\" width=\"10\" height=\"10\" fill=\"" + s.color + "\"/>\n";
    svg += "<text x=\"" + num(legend_x + 16) + "\" y=\"" + num(legend_y) +
           "\" font-size=\"11\" fill=\"#333\">" + escape_xml(s.label) +
           "</text>\n";
    legend_y += 16;
  }
}

const char* region_color(RegionLabel label) {
  switch (label) {
    case RegionLabel::elastic: return "#1f77b4";
    case RegionLabel::plateau: return "#ff7f0e";
    case RegionLabel::densification: return "#2ca02c";
    case RegionLabel::creep: return "#d62728";
  }
  return "#7f7f7f";
}

void write_file(const std::filesystem::path& path, const std::string& body,
                double width, double height) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
      << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << " "
      << num(height) << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
      << body << "</svg>\n";
}

}  // namespace

const char* group_color(const std::string& group) {
  if (group == "rh_ge_49") {
    return "#1f77b4";
  }
  if (group == "rh_lt_49") {
    return "#ff7f0e";
  }
  if (group == "nitrogen") {
    return "#2ca02c";
  }
  return "#7f7f7f";
}

void write_overview_svg(const std::filesystem::path& path,
                        const std::vector<TrendSeries>& modulus_series,
                        const std::vector<TrendSeries>& pore_series) {
  std::string svg;
  Panel top{70, 40, 620, 320, {}, {}};
  draw_scatter_panel(svg, top, modulus_series, "Elastic modulus vs composition",
                     "polymer [wt%]", "modulus [bar]");
  Panel bottom{70, 460, 620, 320, {}, {}};
  draw_scatter_panel(svg, bottom, pore_series, "Pore fraction vs composition",
                     "polymer [wt%]", "pore fraction");
  write_file(path, svg, 760, 840);
}

void write_curve_svg(const std::filesystem::path& path,
                     const StressStrainCurve& curve,
                     const SegmentationResult& seg) {
  if (curve.points.empty()) {
    throw std::invalid_argument("cannot plot an empty curve");
  }
  Panel p{70, 40, 620, 330, {}, {}};
  for (const CurvePoint& pt : curve.points) {
    p.x.include(pt.strain);
    p.y.include(pt.stress_bar);
  }
  p.x.pad();
  p.y.pad();

  std::string svg;
  // Shaded band per fitted region, clamped to the visible strain window.
  for (const RegionFit& r : seg.regions) {
    const double b0 = std::max(r.strain_begin, p.x.lo);
    const double b1 = std::min(r.strain_end, p.x.hi);
    if (!(b1 > b0)) {
      continue;
    }
    svg += "<rect class=\"region region-" + to_string(r.label) + "\" x=\"" +
           num(p.sx(b0)) + "\" y=\"" + num(p.py) + "\" width=\"" +
           num(p.sx(b1) - p.sx(b0)) + "\" height=\"" + num(p.ph) + "\" fill=\"" +
           region_color(r.label) + "\" fill-opacity=\"0.13\"/>\n";
  }
  draw_axes(svg, p, "strain", "stress [bar]");
  svg += "<text x=\"" + num(p.px) + "\" y=\"" + num(p.py - 10) +
         "\" font-size=\"14\" fill=\"#111\">" + escape_xml(curve.sample_id) +
         " position " + std::to_string(curve.position_index) + "</text>\n";

  svg += "<polyline fill=\"none\" stroke=\"#222\" stroke-width=\"1.2\" points=\"";
  for (const CurvePoint& pt : curve.points) {
    svg += num(p.sx(pt.strain)) + "," + num(p.sy(pt.stress_bar)) + " ";
  }
  svg += "\"/>\n";

  // Fitted lines over their own strain windows (creep is strain-vs-time, so
  // its band alone marks it).
  for (const RegionFit& r : seg.regions) {
    if (r.label == RegionLabel::creep) {
      continue;
    }
    const double y0 = r.line.at(r.strain_begin);
    const double y1 = r.line.at(r.strain_end);
    svg += "<line x1=\"" + num(p.sx(r.strain_begin)) + "\" y1=\"" +
           num(p.sy(std::clamp(y0, p.y.lo, p.y.hi))) + "\" x2=\"" +
           num(p.sx(r.strain_end)) + "\" y2=\"" +
           num(p.sy(std::clamp(y1, p.y.lo, p.y.hi))) + "\" stroke=\"" +
           region_color(r.label) + "\" stroke-width=\"2\"/>\n";
  }
  for (double b : seg.breakpoints) {
    if (b < p.x.lo || b > p.x.hi) {
      continue;
    }
    svg += "<line x1=\"" + num(p.sx(b)) + "\" y1=\"" + num(p.py) + "\" x2=\"" +
           num(p.sx(b)) + "\" y2=\"" + num(p.py + p.ph) +
           "\" stroke=\"#555\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
  }
  write_file(path, svg, 760, 430);
}

}  // namespace membrane

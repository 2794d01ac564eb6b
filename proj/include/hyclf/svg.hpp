#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "hyclf/arc.hpp"

namespace hyclf {

enum class PlotView { Time, Planar };

namespace detail {

struct AxisRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo <= hi)) {
      lo = -1.0;
      hi = 1.0;
    }
    const double w = hi - lo;
    const double m = w > 0 ? 0.05 * w : 0.5;
    lo -= m;
    hi += m;
  }
};

inline void svg_num(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  out += buf;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#2ca02c", "#d62728", "#9467bd",
                                 "#ff7f0e", "#17becf", "#e377c2", "#7f7f7f",
                                 "#bcbd22", "#8c564b"};
  return colors[i % 10];
}

/// One coordinate panel: polylines broken at jumps, with pre/post markers.
class Panel {
 public:
  Panel(double x, double y, double w, double h, AxisRange xr, AxisRange yr)
      : x_(x), y_(y), w_(w), h_(h), xr_(xr), yr_(yr) {}

  double px(double v) const {
    return x_ + (v - xr_.lo) / (xr_.hi - xr_.lo) * w_;
  }
  double py(double v) const {
    return y_ + h_ - (v - yr_.lo) / (yr_.hi - yr_.lo) * h_;
  }

  void frame(std::string& out) const {
    out += "<rect x=\"";
    svg_num(out, x_);
    out += "\" y=\"";
    svg_num(out, y_);
    out += "\" width=\"";
    svg_num(out, w_);
    out += "\" height=\"";
    svg_num(out, h_);
    out += "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    // zero axes when inside the range
    if (yr_.lo < 0 && yr_.hi > 0) {
      out += "<line x1=\"";
      svg_num(out, x_);
      out += "\" y1=\"";
      svg_num(out, py(0));
      out += "\" x2=\"";
      svg_num(out, x_ + w_);
      out += "\" y2=\"";
      svg_num(out, py(0));
      out += "\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>\n";
    }
    if (xr_.lo < 0 && xr_.hi > 0) {
      out += "<line x1=\"";
      svg_num(out, px(0));
      out += "\" y1=\"";
      svg_num(out, y_);
      out += "\" x2=\"";
      svg_num(out, px(0));
      out += "\" y2=\"";
      svg_num(out, y_ + h_);
      out += "\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>\n";
    }
  }

  void polyline(std::string& out, const std::vector<std::pair<double, double>>& pts,
                const char* color) const {
    if (pts.size() < 2) return;
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.2\" points=\"";
    for (const auto& [a, b] : pts) {
      svg_num(out, px(a));
      out += ',';
      svg_num(out, py(b));
      out += ' ';
    }
    out += "\"/>\n";
  }

  void marker(std::string& out, double a, double b, const char* color,
              bool filled) const {
    out += "<circle cx=\"";
    svg_num(out, px(a));
    out += "\" cy=\"";
    svg_num(out, py(b));
    out += "\" r=\"2.5\" stroke=\"";
    out += color;
    out += filled ? "\" fill=\"" : "\" fill=\"none";
    if (filled) out += color;
    out += "\"/>\n";
  }

 private:
  double x_, y_, w_, h_;
  AxisRange xr_, yr_;
};

/// Flow segments of an arc split at jumps: (t or x1, value) point lists.
inline std::vector<std::vector<const ArcSample*>> flow_segments(const HybridArc& arc) {
  std::vector<std::vector<const ArcSample*>> segs;
  std::vector<const ArcSample*> cur;
  for (const auto& s : arc.samples) {
    if (s.kind == SampleKind::JumpPost) {
      if (!cur.empty()) segs.push_back(cur);
      cur.clear();
      cur.push_back(&s);
    } else {
      cur.push_back(&s);
    }
  }
  if (!cur.empty()) segs.push_back(cur);
  return segs;
}

}  // namespace detail

/// Renders the arcs as a deterministic SVG (no timestamps): time traces of
/// x1 and x2, or the planar x1-x2 view. Jump discontinuities are separate
/// segments with an open marker at the pre-jump state and a filled one at
/// the post-jump state.
inline std::string render_plot(const std::vector<HybridArc>& arcs, PlotView view) {
  const double W = 800, H = 600, margin = 45;
  std::string out;
  out +=
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" "
      "height=\"600\" viewBox=\"0 0 800 600\">\n"
      "<rect width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n";

  detail::AxisRange xr, yr1, yr2;
  for (const auto& arc : arcs) {
    for (const auto& s : arc.samples) {
      if (arc.n < 2) continue;
      if (view == PlotView::Time) {
        xr.include(s.t);
        yr1.include(s.x[0]);
        yr2.include(s.x[1]);
      } else {
        xr.include(s.x[0]);
        yr1.include(s.x[1]);
      }
    }
  }
  xr.pad();
  yr1.pad();
  yr2.pad();

  const auto draw = [&](const detail::Panel& panel, int coord, bool planar) {
    panel.frame(out);
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      const char* color = detail::palette(i);
      for (const auto& seg : detail::flow_segments(arcs[i])) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(seg.size());
        for (const ArcSample* s : seg) {
          if (planar) pts.emplace_back(s->x[0], s->x[1]);
          else pts.emplace_back(s->t, s->x[coord]);
        }
        panel.polyline(out, pts, color);
      }
      for (const auto& s : arcs[i].samples) {
        if (s.kind == SampleKind::Flow) continue;
        const bool post = s.kind == SampleKind::JumpPost;
        if (planar) panel.marker(out, s.x[0], s.x[1], color, post);
        else panel.marker(out, s.t, s.x[coord], color, post);
      }
    }
  };

  if (view == PlotView::Time) {
    const double ph = (H - 3 * margin) / 2;
    draw(detail::Panel(margin, margin, W - 2 * margin, ph, xr, yr1), 0, false);
    draw(detail::Panel(margin, 2 * margin + ph, W - 2 * margin, ph, xr, yr2), 1,
         false);
  } else {
    draw(detail::Panel(margin, margin, W - 2 * margin, H - 2 * margin, xr, yr1), 0,
         true);
  }
  out += "</svg>\n";
  return out;
}

inline void emit_plot(const std::vector<HybridArc>& arcs, PlotView view,
                      const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << render_plot(arcs, view);
}

}  // namespace hyclf

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fcl/experiment.hpp"

namespace fcl {

class plot_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace svgdet {

inline std::string fnum(double v, const char* fmt = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

inline std::string px(double v) { return fnum(v, "%.2f"); }

inline std::string esc(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> p = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                             "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
                                             "#bcbd22", "#e377c2"};
  return p;
}

class svg_doc {
 public:
  svg_doc(double w, double h) : w_(w), h_(h) {}

  void comment(const std::string& s) { body_ << "<!-- " << s << " -->\n"; }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0, const std::string& dash = "") {
    body_ << "<line x1=\"" << px(x1) << "\" y1=\"" << px(y1) << "\" x2=\"" << px(x2)
          << "\" y2=\"" << px(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << px(width) << "\"";
    if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double width = 1.5) {
    if (pts.empty()) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
          << px(width) << "\" points=\"";
    for (const auto& [x, y] : pts) body_ << px(x) << ',' << px(y) << ' ';
    body_ << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            double opacity = 1.0, const std::string& stroke = "none") {
    body_ << "<rect x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(w)
          << "\" height=\"" << px(h) << "\" fill=\"" << fill << "\" fill-opacity=\""
          << fnum(opacity, "%.3g") << "\" stroke=\"" << stroke << "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& fill) {
    body_ << "<circle cx=\"" << px(x) << "\" cy=\"" << px(y) << "\" r=\"" << px(r)
          << "\" fill=\"" << fill << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, double size = 12.0,
            const std::string& anchor = "start", const std::string& color = "#222222",
            bool bold = false) {
    body_ << "<text x=\"" << px(x) << "\" y=\"" << px(y) << "\" font-family=\"sans-serif\""
          << " font-size=\"" << px(size) << "\" text-anchor=\"" << anchor << "\" fill=\""
          << color << "\"";
    if (bold) body_ << " font-weight=\"bold\"";
    body_ << ">" << esc(s) << "</text>\n";
  }

  std::string finish() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << px(w_) << ' '
        << px(h_) << "\" width=\"" << px(w_) << "\" height=\"" << px(h_) << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << px(w_) << "\" height=\"" << px(h_)
        << "\" fill=\"#ffffff\"/>\n";
    out << body_.str();
    out << "</svg>\n";
    return out.str();
  }

 private:
  double w_;
  double h_;
  std::ostringstream body_;
};

struct axis_map {
  double d0 = 0.0, d1 = 1.0;  // data range
  double p0 = 0.0, p1 = 1.0;  // pixel range
  bool log = false;

  double to_px(double v) const {
    double a = d0, b = d1, x = v;
    if (log) {
      a = std::log10(a);
      b = std::log10(b);
      x = std::log10(std::max(x, 1e-300));
    }
    const double t = b == a ? 0.5 : (x - a) / (b - a);
    return p0 + t * (p1 - p0);
  }
};

inline std::vector<double> nice_ticks(double lo, double hi) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = mag * (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0);
  std::vector<double> t;
  for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step)
    t.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  return t;
}

inline std::vector<double> decade_ticks(double lo, double hi) {
  std::vector<double> t;
  const int e0 = static_cast<int>(std::floor(std::log10(std::max(lo, 1e-300))));
  const int e1 = static_cast<int>(std::ceil(std::log10(std::max(hi, 1e-300))));
  for (int e = e0; e <= e1; ++e) {
    const double v = std::pow(10.0, e);
    if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) t.push_back(v);
  }
  if (t.empty()) t = {lo, hi};
  return t;
}

struct frame {
  double x = 0, y = 0, w = 320, h = 240;  // plot box in pixels
  axis_map xm, ym;
};

// Axis frame with ticks, labels, and an optional panel title.
inline void draw_frame(svg_doc& doc, const frame& f, const std::string& xlab,
                       const std::string& ylab, const std::string& title) {
  doc.rect(f.x, f.y, f.w, f.h, "#ffffff", 1.0, "#444444");
  const auto xt = f.xm.log ? decade_ticks(f.xm.d0, f.xm.d1) : nice_ticks(f.xm.d0, f.xm.d1);
  for (const double v : xt) {
    const double x = f.xm.to_px(v);
    doc.line(x, f.y + f.h, x, f.y + f.h + 4, "#444444");
    doc.line(x, f.y, x, f.y + f.h, "#000000", 0.25);
    doc.text(x, f.y + f.h + 17, fnum(v, "%.4g"), 11, "middle", "#333333");
  }
  const auto yt = nice_ticks(f.ym.d0, f.ym.d1);
  for (const double v : yt) {
    const double y = f.ym.to_px(v);
    doc.line(f.x - 4, y, f.x, y, "#444444");
    doc.line(f.x, y, f.x + f.w, y, "#000000", 0.25);
    doc.text(f.x - 7, y + 4, fnum(v, "%.4g"), 11, "end", "#333333");
  }
  doc.text(f.x + f.w / 2, f.y + f.h + 34, xlab, 13, "middle");
  // vertical-ish y label: keep horizontal above the axis to stay simple
  doc.text(f.x - 8, f.y - 8, ylab, 13, "start");
  if (!title.empty()) doc.text(f.x + f.w / 2, f.y - 8, title, 13, "middle", "#222222", true);
}

struct iso_seg {
  double x1, y1, x2, y2;
};

// Marching squares on a rectangular grid. v is indexed v[ix * ny + iy].
inline std::vector<iso_seg> iso_segments(const std::vector<double>& xs,
                                         const std::vector<double>& ys,
                                         const std::vector<double>& v, double level) {
  const std::size_t nx = xs.size(), ny = ys.size();
  std::vector<iso_seg> segs;
  auto val = [&](std::size_t ix, std::size_t iy) { return v[ix * ny + iy]; };
  auto lerp = [&](double a, double b, double va, double vb) {
    const double t = vb == va ? 0.5 : (level - va) / (vb - va);
    return a + t * (b - a);
  };
  for (std::size_t ix = 0; ix + 1 < nx; ++ix) {
    for (std::size_t iy = 0; iy + 1 < ny; ++iy) {
      const double v00 = val(ix, iy), v10 = val(ix + 1, iy);
      const double v01 = val(ix, iy + 1), v11 = val(ix + 1, iy + 1);
      int idx = 0;
      if (v00 >= level) idx |= 1;
      if (v10 >= level) idx |= 2;
      if (v11 >= level) idx |= 4;
      if (v01 >= level) idx |= 8;
      if (idx == 0 || idx == 15) continue;
      // edge crossing points: bottom, right, top, left
      const double bx = lerp(xs[ix], xs[ix + 1], v00, v10), by = ys[iy];
      const double rx = xs[ix + 1], ry = lerp(ys[iy], ys[iy + 1], v10, v11);
      const double tx = lerp(xs[ix], xs[ix + 1], v01, v11), ty = ys[iy + 1];
      const double lx = xs[ix], ly = lerp(ys[iy], ys[iy + 1], v00, v01);
      auto add = [&](double ax, double ay, double cx, double cy) {
        segs.push_back({ax, ay, cx, cy});
      };
      switch (idx) {
        case 1: case 14: add(lx, ly, bx, by); break;
        case 2: case 13: add(bx, by, rx, ry); break;
        case 3: case 12: add(lx, ly, rx, ry); break;
        case 4: case 11: add(tx, ty, rx, ry); break;
        case 6: case 9:  add(bx, by, tx, ty); break;
        case 7: case 8:  add(lx, ly, tx, ty); break;
        case 5:  add(lx, ly, bx, by); add(tx, ty, rx, ry); break;
        case 10: add(lx, ly, tx, ty); add(bx, by, rx, ry); break;
        default: break;
      }
    }
  }
  return segs;
}

}  // namespace svgdet

namespace detail {

inline double cell_to_double(const result_table& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw plot_error("results file row " + std::to_string(row + 1) + ", column '" +
                     t.columns[col] + "': cannot parse number from '" + s + "'");
  return v;
}

inline void check_schema(const result_table& t, const std::vector<std::string>& expected,
                         const std::string& kind) {
  if (t.columns != expected)
    throw plot_error("results file does not match plot kind '" + kind +
                     "'; expected columns: " + csv_join(expected) +
                     " but found: " + csv_join(t.columns));
  if (t.rows.empty()) throw plot_error("results file has no data rows");
  for (const auto& row : t.rows)
    if (row.size() != expected.size())
      throw plot_error("results file has a row with " + std::to_string(row.size()) +
                       " cells; expected " + std::to_string(expected.size()));
}

inline std::string seed_comment(const result_table& t) {
  for (const auto& c : t.comments)
    if (c.rfind("# seed=", 0) == 0) return c.substr(2);
  return "seed=unknown";
}

struct series_group {
  std::string label;
  std::vector<std::pair<double, double>> pts;
};

}  // namespace detail

/// p versus epsilon, one polyline per (n, sigma, alpha) combination.
inline std::string render_curve_svg(const result_table& t) {
  detail::check_schema(t, curve_columns(), "curve");
  const std::size_t c_n = 1, c_sigma = 2, c_alpha = 3, c_eps = 4, c_p = 5;

  std::vector<std::string> order;
  std::map<std::string, detail::series_group> groups;
  std::set<std::string> n_seen, s_seen, a_seen;
  double eps_lo = 0.0, eps_hi = 0.0;
  bool first = true;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double eps = detail::cell_to_double(t, r, c_eps);
    const double p = detail::cell_to_double(t, r, c_p);
    const std::string key =
        t.rows[r][c_n] + "|" + t.rows[r][c_sigma] + "|" + t.rows[r][c_alpha];
    if (!groups.count(key)) order.push_back(key);
    groups[key].pts.push_back({eps, p});
    n_seen.insert(t.rows[r][c_n]);
    s_seen.insert(t.rows[r][c_sigma]);
    a_seen.insert(t.rows[r][c_alpha]);
    if (first) {
      eps_lo = eps_hi = eps;
      first = false;
    } else {
      eps_lo = std::min(eps_lo, eps);
      eps_hi = std::max(eps_hi, eps);
    }
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string key =
        t.rows[r][c_n] + "|" + t.rows[r][c_sigma] + "|" + t.rows[r][c_alpha];
    auto& label = groups[key].label;
    if (!label.empty()) continue;
    label = "n=" + t.rows[r][c_n];
    if (s_seen.size() > 1) label += ", sigma=" + t.rows[r][c_sigma];
    if (a_seen.size() > 1) label += ", alpha=" + t.rows[r][c_alpha];
  }
  if (eps_hi <= eps_lo) {
    const double pad = std::max(0.5, std::abs(eps_lo) * 0.1);
    eps_lo -= pad;
    eps_hi += pad;
  }

  const double W = 640, H = 430;
  svgdet::svg_doc doc(W, H);
  doc.comment(detail::seed_comment(t));
  svgdet::frame f;
  f.x = 64;
  f.y = 46;
  f.w = W - 64 - 176;
  f.h = H - 46 - 56;
  f.xm = {eps_lo, eps_hi, f.x, f.x + f.w, false};
  f.ym = {0.0, 1.02, f.y + f.h, f.y, false};
  const std::string title = t.rows[0][0] + (a_seen.size() == 1
                                                ? ", alpha=" + *a_seen.begin()
                                                : std::string());
  svgdet::draw_frame(doc, f, "epsilon", "p", title);

  std::size_t gi = 0;
  for (const auto& key : order) {
    const auto& g = groups[key];
    const auto& color = svgdet::palette()[gi % svgdet::palette().size()];
    std::vector<std::pair<double, double>> pix;
    pix.reserve(g.pts.size());
    for (const auto& [x, y] : g.pts) pix.push_back({f.xm.to_px(x), f.ym.to_px(y)});
    doc.polyline(pix, color, 1.8);
    for (const auto& [x, y] : pix) doc.circle(x, y, 2.2, color);
    const double ly = f.y + 14 + 18 * static_cast<double>(gi);
    doc.line(f.x + f.w + 12, ly - 4, f.x + f.w + 34, ly - 4, color, 2.5);
    doc.text(f.x + f.w + 40, ly, g.label, 12);
    ++gi;
  }
  return doc.finish();
}

/// Solve-table rendering. A single (alpha, p) pair over several n becomes an
/// epsilon-versus-n line; a full grid becomes one contour panel per n.
inline std::string render_solve_svg(const result_table& t) {
  detail::check_schema(t, solve_columns(), "contour");
  const std::size_t c_n = 1, c_alpha = 2, c_p = 3, c_eps = 4;

  std::set<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> n_order;
  std::set<std::string> n_set;
  for (const auto& row : t.rows) {
    pairs.insert({row[c_alpha], row[c_p]});
    if (!n_set.count(row[c_n])) {
      n_set.insert(row[c_n]);
      n_order.push_back(row[c_n]);
    }
  }

  if (pairs.size() == 1) {
    // epsilon as a function of n at fixed (alpha, p)
    std::vector<std::pair<double, double>> pts;
    double e_hi = 0.0;
    double n_lo = 0.0, n_hi = 0.0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const double n = detail::cell_to_double(t, r, c_n);
      const double e = detail::cell_to_double(t, r, c_eps);
      pts.push_back({n, e});
      e_hi = std::max(e_hi, e);
      n_lo = r == 0 ? n : std::min(n_lo, n);
      n_hi = r == 0 ? n : std::max(n_hi, n);
    }
    std::sort(pts.begin(), pts.end());
    if (!(n_hi > n_lo)) {
      n_lo = n_lo > 1.0 ? n_lo * 0.5 : n_lo * 0.9;
      n_hi = n_hi * 2.0;
    }
    if (e_hi <= 0.0) e_hi = 1.0;
    const bool logx = n_lo > 0.0 && n_hi / std::max(n_lo, 1e-12) >= 50.0;

    const double W = 560, H = 400;
    svgdet::svg_doc doc(W, H);
    doc.comment(detail::seed_comment(t));
    svgdet::frame f;
    f.x = 70;
    f.y = 46;
    f.w = W - 70 - 30;
    f.h = H - 46 - 56;
    f.xm = {n_lo, n_hi, f.x, f.x + f.w, logx};
    f.ym = {0.0, e_hi * 1.1, f.y + f.h, f.y, false};
    const auto& pr = *pairs.begin();
    svgdet::draw_frame(doc, f, logx ? "n (log scale)" : "n", "epsilon",
                       t.rows[0][0] + ", alpha=" + pr.first + ", p=" + pr.second);
    std::vector<std::pair<double, double>> pix;
    for (const auto& [x, y] : pts) pix.push_back({f.xm.to_px(x), f.ym.to_px(y)});
    doc.polyline(pix, svgdet::palette()[0], 2.0);
    for (const auto& [x, y] : pix) doc.circle(x, y, 3.0, svgdet::palette()[0]);
    return doc.finish();
  }

  // contour panels, one per n, shared epsilon levels
  std::map<std::string, std::map<std::pair<double, double>, double>> per_n;
  std::set<double> alpha_set, p_set;
  double e_min = 0.0, e_max = 0.0;
  bool first = true;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double a = detail::cell_to_double(t, r, c_alpha);
    const double p = detail::cell_to_double(t, r, c_p);
    const double e = detail::cell_to_double(t, r, c_eps);
    per_n[t.rows[r][c_n]][{a, p}] = e;
    alpha_set.insert(a);
    p_set.insert(p);
    if (first) {
      e_min = e_max = e;
      first = false;
    } else {
      e_min = std::min(e_min, e);
      e_max = std::max(e_max, e);
    }
  }
  const std::vector<double> xs(alpha_set.begin(), alpha_set.end());
  const std::vector<double> ys(p_set.begin(), p_set.end());
  if (xs.size() < 2 || ys.size() < 2)
    throw plot_error(
        "contour rendering needs at least a 2x2 (alpha, p) grid; "
        "got " + std::to_string(xs.size()) + " alpha value(s) and " +
        std::to_string(ys.size()) + " p value(s)");

  const int levels = 8;
  std::vector<double> level_vals;
  for (int i = 1; i <= levels; ++i)
    level_vals.push_back(e_min + (e_max - e_min) * static_cast<double>(i) /
                                     static_cast<double>(levels + 1));

  const std::size_t count = n_order.size();
  const std::size_t cols = count <= 3 ? count : (count + 1) / 2 < 3 ? (count + 1) / 2 : 3;
  const std::size_t rows_n = (count + cols - 1) / cols;
  const double cw = 330, ch = 300;
  const double W = 70 + cw * static_cast<double>(cols) + 150;
  const double H = 40 + ch * static_cast<double>(rows_n) + 30;
  svgdet::svg_doc doc(W, H);
  doc.comment(detail::seed_comment(t));

  std::size_t panel = 0;
  for (const auto& n_tag : n_order) {
    const auto& cells = per_n[n_tag];
    std::vector<double> grid(xs.size() * ys.size(),
                             std::numeric_limits<double>::quiet_NaN());
    for (std::size_t ix = 0; ix < xs.size(); ++ix)
      for (std::size_t iy = 0; iy < ys.size(); ++iy) {
        const auto it = cells.find({xs[ix], ys[iy]});
        if (it == cells.end())
          throw plot_error("contour grid is ragged: missing epsilon for n=" + n_tag +
                           " at alpha=" + svgdet::fnum(xs[ix]) + ", p=" +
                           svgdet::fnum(ys[iy]));
        grid[ix * ys.size() + iy] = it->second;
      }

    const std::size_t pc = panel % cols, pr = panel / cols;
    svgdet::frame f;
    f.x = 70 + cw * static_cast<double>(pc);
    f.y = 46 + ch * static_cast<double>(pr);
    f.w = cw - 66;
    f.h = ch - 76;
    f.xm = {xs.front(), xs.back(), f.x, f.x + f.w, false};
    f.ym = {ys.front(), ys.back(), f.y + f.h, f.y, false};
    svgdet::draw_frame(doc, f, "alpha", "p", "n=" + n_tag);

    for (std::size_t li = 0; li < level_vals.size(); ++li) {
      const auto segs = svgdet::iso_segments(xs, ys, grid, level_vals[li]);
      const auto& color = svgdet::palette()[li % svgdet::palette().size()];
      for (const auto& s : segs)
        doc.line(f.xm.to_px(s.x1), f.ym.to_px(s.y1), f.xm.to_px(s.x2), f.ym.to_px(s.y2),
                 color, 1.6);
    }

    // mark epsilon at (alpha=0.5, p=0.95) when that grid point exists
    for (const auto& [key, e] : cells) {
      if (std::abs(key.first - 0.5) < 1e-9 && std::abs(key.second - 0.95) < 1e-9) {
        const double mx = f.xm.to_px(key.first), my = f.ym.to_px(key.second);
        doc.line(mx - 5, my - 5, mx + 5, my + 5, "#000000", 2.0);
        doc.line(mx - 5, my + 5, mx + 5, my - 5, "#000000", 2.0);
        doc.text(mx + 8, my - 6, "eps=" + svgdet::fnum(e, "%.3g"), 12, "start", "#000000",
                 true);
      }
    }
    ++panel;
  }

  // level legend
  const double lx = W - 140, ly0 = 50;
  doc.text(lx, ly0 - 12, "epsilon levels", 12, "start", "#222222", true);
  for (std::size_t li = 0; li < level_vals.size(); ++li) {
    const double ly = ly0 + 16 * static_cast<double>(li);
    doc.line(lx, ly, lx + 22, ly, svgdet::palette()[li % svgdet::palette().size()], 2.5);
    doc.text(lx + 28, ly + 4, svgdet::fnum(level_vals[li], "%.3g"), 11);
  }
  return doc.finish();
}

/// Posterior snapshot rendering: one panel per n, one curve per replicate, a
/// shaded interval of radius ball_eps around the true functional value.
inline std::string render_snapshot_svg(const result_table& t) {
  detail::check_schema(t, snapshot_columns(), "snapshots");
  const std::size_t c_n = 1, c_rep = 3, c_psi = 4, c_val = 5, c_kind = 6, c_psi0 = 7,
                    c_eps = 8;

  std::vector<std::string> n_order;
  std::set<std::string> n_set;
  for (const auto& row : t.rows)
    if (!n_set.count(row[c_n])) {
      n_set.insert(row[c_n]);
      n_order.push_back(row[c_n]);
    }

  const std::size_t count = n_order.size();
  const std::size_t cols = count <= 3 ? count : (count + 1) / 2 < 3 ? (count + 1) / 2 : 3;
  const std::size_t rows_n = (count + cols - 1) / cols;
  const double cw = 340, ch = 300;
  const double W = 60 + cw * static_cast<double>(cols) + 20;
  const double H = 40 + ch * static_cast<double>(rows_n) + 30;
  svgdet::svg_doc doc(W, H);
  doc.comment(detail::seed_comment(t));

  std::size_t panel = 0;
  for (const auto& n_tag : n_order) {
    // gather this panel's replicates
    std::vector<std::string> rep_order;
    std::map<std::string, std::vector<std::pair<double, double>>> reps;
    double x_lo = 0, x_hi = 0, y_hi = 0, psi0 = 0, ball = 0;
    std::string kind = "density";
    bool first = true;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (t.rows[r][c_n] != n_tag) continue;
      const double x = detail::cell_to_double(t, r, c_psi);
      const double y = detail::cell_to_double(t, r, c_val);
      const auto& rep = t.rows[r][c_rep];
      if (!reps.count(rep)) rep_order.push_back(rep);
      reps[rep].push_back({x, y});
      if (first) {
        x_lo = x_hi = x;
        psi0 = detail::cell_to_double(t, r, c_psi0);
        ball = detail::cell_to_double(t, r, c_eps);
        kind = t.rows[r][c_kind];
        first = false;
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_hi = std::max(y_hi, y);
    }
    if (y_hi <= 0.0) y_hi = 1.0;
    if (!(x_hi > x_lo)) {
      x_lo -= 0.5;
      x_hi += 0.5;
    }

    const std::size_t pc = panel % cols, pr = panel / cols;
    svgdet::frame f;
    f.x = 60 + cw * static_cast<double>(pc);
    f.y = 46 + ch * static_cast<double>(pr);
    f.w = cw - 70;
    f.h = ch - 76;
    f.xm = {x_lo, x_hi, f.x, f.x + f.w, false};
    f.ym = {0.0, kind == "cdf" ? 1.02 : y_hi * 1.06, f.y + f.h, f.y, false};
    svgdet::draw_frame(doc, f, "psi", kind, "n=" + n_tag);

    if (ball > 0.0) {
      const double bx0 = std::max(x_lo, psi0 - ball), bx1 = std::min(x_hi, psi0 + ball);
      if (bx1 > bx0)
        doc.rect(f.xm.to_px(bx0), f.y, f.xm.to_px(bx1) - f.xm.to_px(bx0), f.h, "#2ca02c",
                 0.25);
    }
    if (psi0 >= x_lo && psi0 <= x_hi)
      doc.line(f.xm.to_px(psi0), f.y, f.xm.to_px(psi0), f.y + f.h, "#2ca02c", 1.2, "5,4");

    std::size_t ri = 0;
    for (const auto& rep : rep_order) {
      auto pts = reps[rep];
      std::sort(pts.begin(), pts.end());
      std::vector<std::pair<double, double>> pix;
      pix.reserve(pts.size());
      for (const auto& [x, y] : pts) pix.push_back({f.xm.to_px(x), f.ym.to_px(y)});
      doc.polyline(pix, svgdet::palette()[ri % svgdet::palette().size()], 1.4);
      if (pts.size() == 1) doc.circle(pix[0].first, pix[0].second, 2.5, svgdet::palette()[0]);
      ++ri;
    }
    ++panel;
  }
  return doc.finish();
}

inline std::string render_plot(const result_table& t, const std::string& kind) {
  if (kind == "curve") return render_curve_svg(t);
  if (kind == "contour") return render_solve_svg(t);
  if (kind == "snapshots") return render_snapshot_svg(t);
  throw plot_error("unknown plot kind '" + kind + "' (expected curve, contour, or snapshots)");
}

inline void write_plot(const result_table& t, const std::string& kind,
                       const std::filesystem::path& path) {
  const std::string svg = render_plot(t, kind);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << svg;
}

}  // namespace fcl

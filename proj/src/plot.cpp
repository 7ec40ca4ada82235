#include "flowembed/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "flowembed/error.hpp"

namespace flowembed {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 520.0;
constexpr double kMargin = 56.0;
constexpr std::array<const char*, 9> kPalette{"#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                              "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr const char* kOutlierColor = "#d62728";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  if (std::string(buf) == "-0.00") return "0.00";
  return buf;
}

const char* label_color(std::span<const int> labels, std::size_t i) {
  if (labels.empty()) return kPalette[0];
  const int label = labels[i];
  if (label < 0) return kOutlierColor;
  return kPalette[static_cast<std::size_t>(label) % kPalette.size()];
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    } else if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      const double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  }
};

double nice_step(double span) {
  const double raw = span / 5.0;
  const double base = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * base >= raw) return m * base;
  return 10.0 * base;
}

class Canvas {
 public:
  Canvas(Range x, Range y, bool equal_aspect) : x_(x), y_(y) {
    x_.finish();
    y_.finish();
    sx_ = (kWidth - 2 * kMargin) / (x_.hi - x_.lo);
    sy_ = (kHeight - 2 * kMargin) / (y_.hi - y_.lo);
    if (equal_aspect) {
      const double s = std::min(sx_, sy_);
      // Widen the shorter axis so the plot area stays filled.
      x_.lo -= 0.5 * ((kWidth - 2 * kMargin) / s - (x_.hi - x_.lo));
      x_.hi = x_.lo + (kWidth - 2 * kMargin) / s;
      y_.lo -= 0.5 * ((kHeight - 2 * kMargin) / s - (y_.hi - y_.lo));
      y_.hi = y_.lo + (kHeight - 2 * kMargin) / s;
      sx_ = sy_ = s;
    }
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
             "\" viewBox=\"0 0 " + num(kWidth) + ' ' + num(kHeight) + "\">\n";
    body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    body_ += "<defs><clipPath id=\"plot\"><rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" +
             num(kWidth - 2 * kMargin) + "\" height=\"" + num(kHeight - 2 * kMargin) + "\"/></clipPath></defs>\n";
    body_ += "<g clip-path=\"url(#plot)\">\n";
  }

  double px(double x) const { return kMargin + (x - x_.lo) * sx_; }
  double py(double y) const { return kHeight - kMargin - (y - y_.lo) * sy_; }
  double scale_x() const { return sx_; }
  double scale_y() const { return sy_; }

  void raw(const std::string& element) { body_ += element + '\n'; }

  void circle(double x, double y, double r, const std::string& style) {
    raw("<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"" + num(r) + "\" " + style + "/>");
  }

  void polyline(const std::vector<std::array<double, 2>>& pts, const std::string& style) {
    if (pts.size() < 2) return;
    std::string d;
    for (const auto& p : pts) d += num(px(p[0])) + ',' + num(py(p[1])) + ' ';
    d.pop_back();
    raw("<polyline points=\"" + d + "\" fill=\"none\" " + style + "/>");
  }

  void polygon(const std::vector<std::array<double, 2>>& pts, const std::string& style) {
    std::string d;
    for (const auto& p : pts) d += num(px(p[0])) + ',' + num(py(p[1])) + ' ';
    if (!d.empty()) d.pop_back();
    raw("<polygon points=\"" + d + "\" " + style + "/>");
  }

  std::string finish(const std::string& title, const std::string& x_label, const std::string& y_label) {
    body_ += "</g>\n";
    const double left = kMargin, right = kWidth - kMargin, top = kMargin, bottom = kHeight - kMargin;
    body_ += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(right - left) + "\" height=\"" +
             num(bottom - top) + "\" fill=\"none\" stroke=\"black\"/>\n";
    const std::string font = "font-family=\"sans-serif\" font-size=\"11\"";
    const double xs = nice_step(x_.hi - x_.lo);
    for (double t = std::ceil(x_.lo / xs) * xs; t <= x_.hi; t += xs) {
      const double p = px(t);
      body_ += "<line x1=\"" + num(p) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(p) + "\" y2=\"" +
               num(bottom + 5) + "\" stroke=\"black\"/>";
      body_ += "<text x=\"" + num(p) + "\" y=\"" + num(bottom + 18) + "\" text-anchor=\"middle\" " + font + ">" +
               tick(t, xs) + "</text>\n";
    }
    const double ys = nice_step(y_.hi - y_.lo);
    for (double t = std::ceil(y_.lo / ys) * ys; t <= y_.hi; t += ys) {
      const double p = py(t);
      body_ += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(p) + "\" x2=\"" + num(left) + "\" y2=\"" + num(p) +
               "\" stroke=\"black\"/>";
      body_ += "<text x=\"" + num(left - 8) + "\" y=\"" + num(p + 4) + "\" text-anchor=\"end\" " + font + ">" +
               tick(t, ys) + "</text>\n";
    }
    body_ += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(top - 20) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
    body_ += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\" " + font +
             ">" + x_label + "</text>\n";
    body_ += "<text x=\"14\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
             num(kHeight / 2) + ")\" " + font + ">" + y_label + "</text>\n";
    body_ += "</svg>\n";
    return body_;
  }

 private:
  static std::string tick(double t, double step) {
    if (std::abs(t) < 1e-9 * step) t = 0.0;
    char buf[32];
    const int digits = std::max(0, static_cast<int>(-std::floor(std::log10(step))));
    std::snprintf(buf, sizeof buf, "%.*f", digits, t);
    return buf;
  }

  Range x_;
  Range y_;
  double sx_ = 1.0;
  double sy_ = 1.0;
  std::string body_;
};

double coord(const Eigen::MatrixXd& points, Eigen::Index row, Eigen::Index dim) {
  return dim < points.cols() ? points(row, dim) : 0.0;
}

double coord(const EmbeddedPoint& p, Eigen::Index dim) { return dim < p.size() ? p(dim) : 0.0; }

std::string fill_for(double t) {
  // Light-to-dark blue ramp.
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(247 - t * (247 - 8)));
  const int g = static_cast<int>(std::lround(251 - t * (251 - 81)));
  const int b = static_cast<int>(std::lround(255 - t * (255 - 156)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string map_svg(const SimplicialComplex& sc, std::span<const Point2> coords,
                    std::span<const TrajectoryPath> trajectories, std::span<const int> labels) {
  if (coords.size() != sc.vertex_count())
    throw Error(ErrorKind::ValidationError, "coordinates cover " + std::to_string(coords.size()) +
                                                " vertices, the complex has " + std::to_string(sc.vertex_count()));
  if (!labels.empty() && labels.size() != trajectories.size())
    throw Error(ErrorKind::ValidationError, "one label per trajectory required");
  Range x, y;
  for (const Point2& p : coords) {
    x.add(p.x);
    y.add(p.y);
  }
  Canvas canvas(x, y, true);
  for (const OrientedTriangle& t : sc.triangles())
    canvas.polygon({{coords[t.a].x, coords[t.a].y}, {coords[t.b].x, coords[t.b].y}, {coords[t.c].x, coords[t.c].y}},
                   "fill=\"#eeeeee\" stroke=\"none\"");
  for (const OrientedEdge& e : sc.edges())
    canvas.polyline({{coords[e.tail].x, coords[e.tail].y}, {coords[e.head].x, coords[e.head].y}},
                    "stroke=\"#bbbbbb\" stroke-width=\"0.5\"");
  // Outliers last so they stay visible on top of the classes.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      const bool outlier = !labels.empty() && labels[i] < 0;
      if (outlier != (pass == 1)) continue;
      std::vector<std::array<double, 2>> pts;
      for (VertexId v : trajectories[i].vertices) {
        if (v >= coords.size())
          throw Error(ErrorKind::ValidationError, "trajectory " + trajectories[i].id + " leaves the complex");
        pts.push_back({coords[v].x, coords[v].y});
      }
      canvas.polyline(pts, std::string("stroke=\"") + label_color(labels, i) + "\" stroke-width=\"" +
                               (outlier ? "2.5" : "1.2") + "\" stroke-opacity=\"" + (outlier ? "1" : "0.45") + "\"");
    }
  }
  return canvas.finish("trajectories", "x", "y");
}

std::string embedding_svg(const Eigen::MatrixXd& points, std::span<const int> labels,
                          std::span<const EmbeddedPolyline> polylines) {
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(points.rows()))
    throw Error(ErrorKind::ValidationError, "one label per embedded point required");
  if (!polylines.empty() && polylines.size() != static_cast<std::size_t>(points.rows()))
    throw Error(ErrorKind::ValidationError, "one polyline per embedded point required");
  Range x, y;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    x.add(coord(points, i, 0));
    y.add(coord(points, i, 1));
  }
  for (const auto& line : polylines)
    for (const auto& p : line) {
      x.add(coord(p, 0));
      y.add(coord(p, 1));
    }
  Canvas canvas(x, y, false);
  for (std::size_t i = 0; i < polylines.size(); ++i) {
    std::vector<std::array<double, 2>> pts;
    for (const auto& p : polylines[i]) pts.push_back({coord(p, 0), coord(p, 1)});
    canvas.polyline(pts, std::string("stroke=\"") + label_color(labels, i) + "\" stroke-width=\"0.8\" stroke-opacity=\"0.35\"");
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    canvas.circle(coord(points, i, 0), coord(points, i, 1), 3.5,
                  std::string("fill=\"") + label_color(labels, static_cast<std::size_t>(i)) +
                      "\" stroke=\"black\" stroke-width=\"0.4\"");
  return canvas.finish("harmonic embedding", "u1", "u2");
}

std::string detection_svg(const Eigen::MatrixXd& points, std::span<const double> scores,
                          const std::vector<bool>& flagged, Detector detector, std::span<const GridSample> grid) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (scores.size() != n || flagged.size() != n)
    throw Error(ErrorKind::ValidationError, "scores and flags must match the embedded points");
  Range x, y;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    x.add(coord(points, i, 0));
    y.add(coord(points, i, 1));
  }
  for (const GridSample& g : grid) {
    x.add(g.x);
    y.add(g.y);
  }
  Canvas canvas(x, y, false);

  if (!grid.empty()) {
    std::map<double, int> xs, ys;
    double s_lo = std::numeric_limits<double>::infinity(), s_hi = -s_lo;
    for (const GridSample& g : grid) {
      xs[g.x] = 0;
      ys[g.y] = 0;
      s_lo = std::min(s_lo, g.score);
      s_hi = std::max(s_hi, g.score);
    }
    const double dx = xs.size() > 1 ? (xs.rbegin()->first - xs.begin()->first) / (xs.size() - 1) : 1.0;
    const double dy = ys.size() > 1 ? (ys.rbegin()->first - ys.begin()->first) / (ys.size() - 1) : 1.0;
    // Quantize into bands so the shading reads as filled contours.
    constexpr int kBands = 8;
    for (const GridSample& g : grid) {
      const double t = s_hi > s_lo ? (g.score - s_lo) / (s_hi - s_lo) : 0.0;
      const double band = std::min(std::floor(t * kBands), kBands - 1.0) / (kBands - 1.0);
      const double x0 = canvas.px(g.x - 0.5 * dx);
      const double y0 = canvas.py(g.y + 0.5 * dy);
      canvas.raw("<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(dx * canvas.scale_x() + 0.5) +
                 "\" height=\"" + num(dy * canvas.scale_y() + 0.5) + "\" fill=\"" + fill_for(band) + "\"/>");
    }
  }

  if (detector == Detector::LocalOutlierFactor && n > 0) {
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    for (std::size_t i = 0; i < n; ++i) {
      const double t = *hi > *lo ? (scores[i] - *lo) / (*hi - *lo) : 0.0;
      canvas.circle(coord(points, i, 0), coord(points, i, 1), 4.0 + 30.0 * t,
                    "fill=\"none\" stroke=\"#d62728\" stroke-width=\"0.8\"");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    canvas.circle(coord(points, i, 0), coord(points, i, 1), 3.0,
                  std::string("fill=\"") + (flagged[i] ? kOutlierColor : "white") +
                      "\" stroke=\"black\" stroke-width=\"0.6\"");
  return canvas.finish(detector == Detector::LocalOutlierFactor ? "local outlier factor" : "isolation forest",
                       "u1", "u2");
}

}  // namespace flowembed

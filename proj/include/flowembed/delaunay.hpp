#pragma once

#include <span>
#include <vector>

#include "flowembed/complex.hpp"

namespace flowembed {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  auto operator<=>(const Point2&) const = default;
};

/// Sign of the orientation determinant: +1 when a, b, c turn counter-clockwise.
/// Exact: a floating-point filter with a fallback to rational arithmetic.
int orient2d(Point2 a, Point2 b, Point2 c);

/// +1 when d lies strictly inside the circumcircle of counter-clockwise (a, b, c),
/// 0 when cocircular, -1 outside. Exact.
int incircle(Point2 a, Point2 b, Point2 c, Point2 d);

struct Triangulation {
  SimplicialComplex complex;
  std::vector<Point2> coords;
};

/// Delaunay triangulation of the points; vertex i is points[i] and every
/// triangle becomes a 2-simplex. Incremental Bowyer-Watson in which the
/// bounding super-triangle is symbolic (a vertex at infinity), so the hull is
/// always complete. Cocircular ties resolve to the lexicographically smaller
/// diagonal. Throws DegenerateInput for fewer than 3 points, duplicate points
/// or all points collinear.
Triangulation delaunay_triangulate(std::span<const Point2> points);

}  // namespace flowembed

#include "flowembed/delaunay.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include <boost/multiprecision/cpp_int.hpp>

#include "flowembed/error.hpp"

namespace flowembed {

namespace {

using Rational = boost::multiprecision::cpp_rational;

constexpr double kEpsilon = std::numeric_limits<double>::epsilon() / 2.0;  // 2^-53
constexpr double kOrientBound = (3.0 + 16.0 * kEpsilon) * kEpsilon;
constexpr double kIncircleBound = (10.0 + 96.0 * kEpsilon) * kEpsilon;

template <class T>
int sign_of(const T& value) {
  return value > 0 ? 1 : (value < 0 ? -1 : 0);
}

int orient2d_exact(Point2 a, Point2 b, Point2 c) {
  const Rational acx = Rational(a.x) - Rational(c.x);
  const Rational bcx = Rational(b.x) - Rational(c.x);
  const Rational acy = Rational(a.y) - Rational(c.y);
  const Rational bcy = Rational(b.y) - Rational(c.y);
  return sign_of(Rational(acx * bcy - acy * bcx));
}

int incircle_exact(Point2 a, Point2 b, Point2 c, Point2 d) {
  const Rational adx = Rational(a.x) - Rational(d.x);
  const Rational ady = Rational(a.y) - Rational(d.y);
  const Rational bdx = Rational(b.x) - Rational(d.x);
  const Rational bdy = Rational(b.y) - Rational(d.y);
  const Rational cdx = Rational(c.x) - Rational(d.x);
  const Rational cdy = Rational(c.y) - Rational(d.y);
  const Rational alift = adx * adx + ady * ady;
  const Rational blift = bdx * bdx + bdy * bdy;
  const Rational clift = cdx * cdx + cdy * cdy;
  const Rational det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                       clift * (adx * bdy - bdx * ady);
  return sign_of(det);
}

}  // namespace

int orient2d(Point2 a, Point2 b, Point2 c) {
  const double left = (a.x - c.x) * (b.y - c.y);
  const double right = (a.y - c.y) * (b.x - c.x);
  const double det = left - right;
  const double bound = kOrientBound * (std::abs(left) + std::abs(right));
  if (det > bound || -det > bound) return sign_of(det);
  return orient2d_exact(a, b, c);
}

int incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = kIncircleBound * permanent;
  if (det > bound || -det > bound) return sign_of(det);
  return incircle_exact(a, b, c, d);
}

namespace {

constexpr VertexId kGhost = std::numeric_limits<VertexId>::max();

// Counter-clockwise triangle; a ghost (u, w, kGhost) stands for the unbounded
// region to the left of hull edge u->w.
struct Face {
  std::array<VertexId, 3> v;
  bool alive = true;
  bool ghost() const { return v[2] == kGhost; }
};

std::uint64_t directed_key(VertexId u, VertexId w) {
  return (static_cast<std::uint64_t>(u) << 32) | w;
}

bool strictly_between(Point2 a, Point2 b, Point2 p) {
  // p is collinear with a, b; test the open segment.
  if (a.x != b.x) return (p.x > std::min(a.x, b.x)) && (p.x < std::max(a.x, b.x));
  return (p.y > std::min(a.y, b.y)) && (p.y < std::max(a.y, b.y));
}

class BowyerWatson {
 public:
  explicit BowyerWatson(std::span<const Point2> points) : pts_(points) {}

  std::vector<std::array<VertexId, 3>> run() {
    const auto n = static_cast<VertexId>(pts_.size());
    const VertexId first = 0;
    VertexId second = 1;
    VertexId third = kGhost;
    for (VertexId i = 2; i < n; ++i) {
      if (orient2d(pts_[first], pts_[second], pts_[i]) != 0) {
        third = i;
        break;
      }
    }
    if (third == kGhost) throw Error(ErrorKind::DegenerateInput, "all points are collinear");

    std::array<VertexId, 3> seed{first, second, third};
    if (orient2d(pts_[first], pts_[second], pts_[third]) < 0) std::swap(seed[1], seed[2]);
    faces_.push_back({seed});
    for (int i = 0; i < 3; ++i) {
      faces_.push_back({{seed[(i + 1) % 3], seed[i], kGhost}});
    }
    for (VertexId i = 0; i < n; ++i) {
      if (i != first && i != second && i != third) insert(i);
    }

    std::vector<std::array<VertexId, 3>> out;
    for (const auto& f : faces_) {
      if (f.alive && !f.ghost()) out.push_back(f.v);
    }
    return out;
  }

 private:
  bool in_cavity(const Face& f, VertexId p) const {
    const Point2 q = pts_[p];
    if (f.ghost()) {
      const int o = orient2d(pts_[f.v[0]], pts_[f.v[1]], q);
      return o > 0 || (o == 0 && strictly_between(pts_[f.v[0]], pts_[f.v[1]], q));
    }
    return incircle(pts_[f.v[0]], pts_[f.v[1]], pts_[f.v[2]], q) > 0;
  }

  void insert(VertexId p) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < faces_.size(); ++i) {
      if (faces_[i].alive && in_cavity(faces_[i], p)) bad.push_back(i);
    }
    std::unordered_map<std::uint64_t, int> directed;
    for (std::size_t i : bad) {
      const auto& v = faces_[i].v;
      for (int k = 0; k < 3; ++k) ++directed[directed_key(v[k], v[(k + 1) % 3])];
    }
    std::vector<std::array<VertexId, 3>> created;
    for (std::size_t i : bad) {
      const auto v = faces_[i].v;
      for (int k = 0; k < 3; ++k) {
        const VertexId u = v[k];
        const VertexId w = v[(k + 1) % 3];
        if (directed.contains(directed_key(w, u))) continue;  // interior to the cavity
        if (w == kGhost) {
          created.push_back({p, u, kGhost});
        } else if (u == kGhost) {
          created.push_back({w, p, kGhost});
        } else {
          created.push_back({u, w, p});
        }
      }
      faces_[i].alive = false;
    }
    for (const auto& t : created) faces_.push_back({t});
    if (faces_.size() > 8 * pts_.size() + 64) compact();
  }

  void compact() {
    std::erase_if(faces_, [](const Face& f) { return !f.alive; });
  }

  std::span<const Point2> pts_;
  std::vector<Face> faces_;
};

// Flip cocircular quads to the lexicographically smaller diagonal. Each flip
// replaces one edge by a smaller one, so the loop terminates.
void resolve_cocircular(std::span<const Point2> pts, std::vector<std::array<VertexId, 3>>& tris) {
  auto undirected = [](VertexId a, VertexId b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
  };
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::pair<VertexId, VertexId>, std::vector<std::size_t>> owners;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int k = 0; k < 3; ++k) owners[undirected(tris[t][k], tris[t][(k + 1) % 3])].push_back(t);
    }
    for (const auto& [edge, faces] : owners) {
      if (faces.size() != 2) continue;
      const auto& t1 = tris[faces[0]];
      const auto& t2 = tris[faces[1]];
      auto opposite = [&](const std::array<VertexId, 3>& t) {
        for (VertexId v : t) {
          if (v != edge.first && v != edge.second) return v;
        }
        return kGhost;
      };
      const VertexId x = opposite(t1);
      const VertexId y = opposite(t2);
      if (incircle(pts[t1[0]], pts[t1[1]], pts[t1[2]], pts[y]) != 0) continue;
      if (!(undirected(x, y) < edge)) continue;
      // Both new triangles keep counter-clockwise orientation.
      std::array<VertexId, 3> n1{x, y, edge.first};
      std::array<VertexId, 3> n2{y, x, edge.second};
      if (orient2d(pts[n1[0]], pts[n1[1]], pts[n1[2]]) < 0) std::swap(n1[0], n1[1]);
      if (orient2d(pts[n2[0]], pts[n2[1]], pts[n2[2]]) < 0) std::swap(n2[0], n2[1]);
      if (orient2d(pts[n1[0]], pts[n1[1]], pts[n1[2]]) == 0 ||
          orient2d(pts[n2[0]], pts[n2[1]], pts[n2[2]]) == 0) {
        continue;
      }
      tris[faces[0]] = n1;
      tris[faces[1]] = n2;
      changed = true;
      break;
    }
  }
}

}  // namespace

Triangulation delaunay_triangulate(std::span<const Point2> points) {
  if (points.size() < 3) throw Error(ErrorKind::DegenerateInput, "need at least 3 points");
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorKind::DegenerateInput, "non-finite coordinate");
    }
  }
  {
    std::set<Point2> seen;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!seen.insert(points[i]).second) {
        throw Error(ErrorKind::DegenerateInput, "duplicate point at index " + std::to_string(i));
      }
    }
  }

  BowyerWatson bw(points);
  auto tris = bw.run();
  resolve_cocircular(points, tris);

  std::set<std::pair<VertexId, VertexId>> edge_set;
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) {
      const VertexId a = t[k];
      const VertexId b = t[(k + 1) % 3];
      edge_set.emplace(std::min(a, b), std::max(a, b));
    }
  }
  std::vector<std::array<VertexId, 2>> edges;
  edges.reserve(edge_set.size());
  for (const auto& [a, b] : edge_set) edges.push_back({a, b});

  Triangulation out;
  out.complex = SimplicialComplex::build(points.size(), edges, tris);
  out.coords.assign(points.begin(), points.end());
  return out;
}

}  // namespace flowembed

#include "flowembed/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "flowembed/csv.hpp"
#include "flowembed/error.hpp"

namespace flowembed {

std::vector<HoleSpec> SyntheticConfig::default_holes() {
  return {{{0.35, 0.55}, 0.12}, {{0.65, 0.35}, 0.12}};
}

std::vector<ClassSpec> SyntheticConfig::default_classes() {
  return {
      // along the top, above both holes
      {{0.02, 0.14, 0.86, 0.98}, {0.86, 0.98, 0.86, 0.98}, 40},
      // along the bottom, below both holes
      {{0.02, 0.14, 0.02, 0.14}, {0.86, 0.98, 0.02, 0.14}, 40},
      // down the left side, past the first hole
      {{0.02, 0.14, 0.86, 0.98}, {0.02, 0.14, 0.24, 0.36}, 40},
  };
}

void validate(const SyntheticConfig& config) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (config.point_count < 3) fail("point_count must be at least 3");
  if (config.classes.empty()) fail("at least one trajectory class is required");
  if (!(config.weight_growth >= 1.0)) fail("weight_growth must be >= 1");
  if (config.outlier_count > 0 && config.outlier_candidates == 0) fail("outlier_candidates must be positive");
  auto in_unit = [](const Box& b) {
    return b.x_min >= 0.0 && b.x_max <= 1.0 && b.y_min >= 0.0 && b.y_max <= 1.0 &&
           b.x_min <= b.x_max && b.y_min <= b.y_max;
  };
  for (std::size_t i = 0; i < config.classes.size(); ++i) {
    const auto& c = config.classes[i];
    if (c.count == 0) fail("class " + std::to_string(i) + " has count 0");
    if (!in_unit(c.source) || !in_unit(c.target)) {
      fail("class " + std::to_string(i) + " region leaves the unit square");
    }
  }
  for (const auto& h : config.holes) {
    if (!(h.radius > 0.0)) fail("hole radius must be positive");
  }
}

std::vector<bool> LabeledDataset::outlier_mask() const {
  std::vector<bool> mask(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) mask[i] = labels[i] == kOutlierLabel;
  return mask;
}

PunchedComplex punch_holes(const SimplicialComplex& sc, std::span<const Point2> coords,
                           std::span<const HoleSpec> holes) {
  if (coords.size() != sc.vertex_count()) {
    throw Error(ErrorKind::DimensionMismatch, "one coordinate per vertex required");
  }
  std::vector<bool> boundary(sc.vertex_count(), false);
  for (std::size_t e = 0; e < sc.edge_count(); ++e) {
    if (sc.edge_triangles()[e].size() < 2) {
      boundary[sc.edges()[e].tail] = true;
      boundary[sc.edges()[e].head] = true;
    }
  }
  std::vector<bool> keep(sc.vertex_count(), true);
  for (std::size_t h = 0; h < holes.size(); ++h) {
    const auto& hole = holes[h];
    for (std::size_t v = 0; v < coords.size(); ++v) {
      if (std::hypot(coords[v].x - hole.center.x, coords[v].y - hole.center.y) <= hole.radius) {
        if (boundary[v]) {
          throw Error(ErrorKind::HoleSwallowsBoundary,
                      "hole " + std::to_string(h) + " reaches boundary vertex " + std::to_string(v + 1));
        }
        keep[v] = false;
      }
    }
  }

  std::vector<std::optional<VertexId>> map;
  PunchedComplex out;
  out.complex = sc.induced_subcomplex(keep, &map);
  for (std::size_t v = 0; v < coords.size(); ++v) {
    if (map[v]) out.coords.push_back(coords[v]);
  }
  if (out.complex.vertex_count() == 0 || out.complex.connected_components() != 1) {
    throw Error(ErrorKind::DisconnectedResult, "removing the holes disconnects the complex");
  }
  const std::size_t betti = betti_1(out.complex);
  if (betti != holes.size()) {
    throw Error(ErrorKind::HoleCountMismatch, std::to_string(holes.size()) + " holes produced beta_1 = " +
                                                  std::to_string(betti));
  }
  return out;
}

std::vector<VertexId> vertices_in_box(std::span<const Point2> coords, const Box& box) {
  std::vector<VertexId> out;
  for (std::size_t v = 0; v < coords.size(); ++v) {
    if (box.contains(coords[v])) out.push_back(static_cast<VertexId>(v));
  }
  return out;
}

std::vector<double> euclidean_weights(const SimplicialComplex& sc, std::span<const Point2> coords) {
  std::vector<double> w(sc.edge_count());
  for (std::size_t e = 0; e < sc.edge_count(); ++e) {
    const auto& a = coords[sc.edges()[e].tail];
    const auto& b = coords[sc.edges()[e].head];
    w[e] = std::hypot(a.x - b.x, a.y - b.y);
  }
  return w;
}

std::vector<VertexId> shortest_path(const SimplicialComplex& sc, std::span<const double> weights,
                                    VertexId source, VertexId target) {
  const std::size_t n = sc.vertex_count();
  if (source >= n || target >= n) {
    throw Error(ErrorKind::InvalidArgument, "path endpoint outside the complex");
  }
  if (weights.size() != sc.edge_count()) {
    throw Error(ErrorKind::DimensionMismatch, "one weight per edge required");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr VertexId kNone = std::numeric_limits<VertexId>::max();
  std::vector<double> dist(n, kInf);
  std::vector<VertexId> parent(n, kNone);
  std::vector<bool> settled(n, false);
  using Entry = std::pair<double, VertexId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (settled[u]) continue;
    settled[u] = true;
    if (u == target) break;
    for (const auto& nb : sc.neighbors(u)) {
      const double candidate = d + weights[nb.edge];
      if (candidate < dist[nb.vertex]) {
        dist[nb.vertex] = candidate;
        parent[nb.vertex] = u;
        queue.emplace(candidate, nb.vertex);
      }
    }
  }
  if (!settled[target]) {
    throw Error(ErrorKind::Unreachable, "no path from vertex " + std::to_string(source + 1) +
                                            " to vertex " + std::to_string(target + 1));
  }
  std::vector<VertexId> path{target};
  while (path.back() != source) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<TrajectoryPath> generate_class(const SimplicialComplex& sc, std::vector<double> weights,
                                           std::span<const VertexId> sources,
                                           std::span<const VertexId> targets, std::size_t count,
                                           double weight_growth, Rng& rng) {
  if (sources.empty() || targets.empty()) {
    throw Error(ErrorKind::InvalidArgument, "departure and arrival regions must contain vertices");
  }
  std::vector<TrajectoryPath> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const VertexId s = sources[rng.index(sources.size())];
    VertexId t = targets[rng.index(targets.size())];
    if (s == t) {
      throw Error(ErrorKind::InvalidArgument,
                  "departure and arrival coincide at vertex " + std::to_string(s + 1));
    }
    TrajectoryPath path{std::to_string(i + 1), shortest_path(sc, weights, s, t)};
    for (std::size_t k = 0; k + 1 < path.vertices.size(); ++k) {
      weights[*sc.edge_index(path.vertices[k], path.vertices[k + 1])] *= weight_growth;
    }
    out.push_back(std::move(path));
  }
  return out;
}

ClassGeometry describe_class(const SimplicialComplex& sc, const HarmonicBasis& basis,
                             std::span<const TrajectoryPath> members, std::vector<VertexId> sources,
                             std::vector<VertexId> targets) {
  ClassGeometry geometry;
  geometry.sources = std::move(sources);
  geometry.targets = std::move(targets);
  geometry.centroid = EmbeddedPoint::Zero(static_cast<Eigen::Index>(basis.betti()));
  for (const auto& m : members) {
    geometry.members.push_back(flatten_embed(basis, path_to_flow(sc, m.vertices)));
    geometry.centroid += geometry.members.back();
  }
  if (!members.empty()) geometry.centroid /= static_cast<double>(members.size());
  for (const auto& p : geometry.members) {
    geometry.spread = std::max(geometry.spread, (p - geometry.centroid).norm());
  }
  return geometry;
}

std::vector<TrajectoryPath> plant_outliers(const SimplicialComplex& sc, std::span<const double> base_weights,
                                           const HarmonicBasis& basis,
                                           std::span<const ClassGeometry> classes,
                                           std::size_t outlier_count, std::size_t candidates, Rng& rng) {
  std::vector<TrajectoryPath> out;
  if (outlier_count == 0) return out;
  if (basis.betti() == 0) {
    throw Error(ErrorKind::InvalidArgument, "outliers need a complex with at least one hole");
  }
  if (classes.empty()) throw Error(ErrorKind::InvalidArgument, "outliers need trajectory classes");

  std::vector<EmbeddedPoint> occupied;
  for (const auto& c : classes) occupied.insert(occupied.end(), c.members.begin(), c.members.end());

  constexpr int kRounds = 8;
  const auto n = static_cast<VertexId>(sc.vertex_count());
  for (std::size_t k = 0; k < outlier_count; ++k) {
    std::vector<VertexId> best;
    EmbeddedPoint best_point;
    bool best_clear = false;
    double best_gap = -1.0;
    for (int round = 0; round < kRounds && !best_clear; ++round) {
      const auto& cls = classes[rng.index(classes.size())];
      const VertexId s = cls.sources[rng.index(cls.sources.size())];
      const VertexId t = cls.targets[rng.index(cls.targets.size())];
      for (std::size_t c = 0; c < candidates; ++c) {
        const auto w = static_cast<VertexId>(rng.index(n));
        if (w == s || w == t) continue;
        auto path = concatenate_paths(shortest_path(sc, base_weights, s, w),
                                      shortest_path(sc, base_weights, w, t));
        EmbeddedPoint e = flatten_embed(basis, path_to_flow(sc, path));
        bool clear = true;
        for (const auto& other : classes) clear = clear && (e - other.centroid).norm() > other.spread;
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& p : occupied) gap = std::min(gap, (e - p).norm());
        if (std::pair{clear, gap} > std::pair{best_clear, best_gap}) {
          best_clear = clear;
          best_gap = gap;
          best = std::move(path);
          best_point = std::move(e);
        }
      }
    }
    if (best.empty()) throw Error(ErrorKind::Unreachable, "no waypoint candidate produced a path");
    occupied.push_back(best_point);
    out.push_back({std::to_string(k + 1), std::move(best)});
  }
  return out;
}

LabeledDataset generate_dataset(const SyntheticConfig& config) {
  validate(config);
  Rng point_rng(derive_seed(config.seed, 0));
  std::vector<Point2> points(config.point_count);
  for (auto& p : points) {
    p.x = point_rng.uniform();
    p.y = point_rng.uniform();
  }
  const Triangulation tri = delaunay_triangulate(points);
  PunchedComplex world = punch_holes(tri.complex, tri.coords, config.holes);

  LabeledDataset data;
  data.complex = std::move(world.complex);
  data.coords = std::move(world.coords);
  const auto weights = euclidean_weights(data.complex, data.coords);
  const HarmonicBasis basis = harmonic_basis(hodge_laplacian(data.complex));

  std::vector<ClassGeometry> geometry;
  for (std::size_t c = 0; c < config.classes.size(); ++c) {
    const auto& cls = config.classes[c];
    auto sources = vertices_in_box(data.coords, cls.source);
    auto targets = vertices_in_box(data.coords, cls.target);
    if (sources.empty() || targets.empty()) {
      throw Error(ErrorKind::InvalidArgument,
                  "class " + std::to_string(c) + " has an empty departure or arrival region");
    }
    Rng class_rng(derive_seed(config.seed, 1 + c));
    auto members = generate_class(data.complex, weights, sources, targets, cls.count,
                                  config.weight_growth, class_rng);
    geometry.push_back(describe_class(data.complex, basis, members, std::move(sources), std::move(targets)));
    for (auto& m : members) {
      data.trajectories.push_back(std::move(m));
      data.labels.push_back(static_cast<int>(c));
    }
  }
  Rng outlier_rng(derive_seed(config.seed, 0x0071E5ULL));
  for (auto& o : plant_outliers(data.complex, weights, basis, geometry, config.outlier_count,
                                config.outlier_candidates, outlier_rng)) {
    data.trajectories.push_back(std::move(o));
    data.labels.push_back(kOutlierLabel);
  }
  for (std::size_t i = 0; i < data.trajectories.size(); ++i) {
    data.trajectories[i].id = std::to_string(i + 1);
  }
  return data;
}

std::string coords_to_csv(std::span<const Point2> coords) {
  std::string out = "vertex,x,y\n";
  for (std::size_t v = 0; v < coords.size(); ++v) {
    out += std::to_string(v + 1) + ',' + format_double(coords[v].x) + ',' + format_double(coords[v].y) + '\n';
  }
  return out;
}

std::vector<Point2> coords_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  const std::size_t v_col = table.column("vertex");
  const std::size_t x_col = table.column("x");
  const std::size_t y_col = table.column("y");
  std::vector<std::optional<Point2>> slots(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = std::to_string(table.lines[r]);
    if (row.size() != table.header.size()) throw Error(ErrorKind::ParseError, "line " + line + ": field count");
    const auto v = parse_integer(row[v_col]);
    const auto x = parse_double(row[x_col]);
    const auto y = parse_double(row[y_col]);
    if (!v || !x || !y || *v < 1 || static_cast<std::size_t>(*v) > slots.size()) {
      throw Error(ErrorKind::ParseError, "line " + line + ": bad vertex or coordinate");
    }
    auto& slot = slots[static_cast<std::size_t>(*v - 1)];
    if (slot) throw Error(ErrorKind::ParseError, "line " + line + ": duplicate vertex");
    slot = Point2{*x, *y};
  }
  std::vector<Point2> out;
  out.reserve(slots.size());
  for (const auto& s : slots) out.push_back(*s);
  return out;
}

std::string labels_to_csv(const LabeledDataset& dataset) {
  std::string out = "trajectory_id,label,is_outlier\n";
  for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
    out += csv_escape(dataset.trajectories[i].id) + ',' + std::to_string(dataset.labels[i]) + ',' +
           (dataset.labels[i] == kOutlierLabel ? "1" : "0") + '\n';
  }
  return out;
}

std::vector<LabelRow> labels_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  const std::size_t id_col = table.column("trajectory_id");
  const std::size_t label_col = table.column("label");
  const std::size_t outlier_col = table.column("is_outlier");
  std::vector<LabelRow> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = std::to_string(table.lines[r]);
    if (row.size() != table.header.size()) throw Error(ErrorKind::ParseError, "line " + line + ": field count");
    const auto label = parse_integer(row[label_col]);
    const auto flag = parse_integer(row[outlier_col]);
    if (!label || !flag || (*flag != 0 && *flag != 1)) {
      throw Error(ErrorKind::ParseError, "line " + line + ": bad label");
    }
    out.push_back({row[id_col], static_cast<int>(*label), *flag == 1});
  }
  return out;
}

}  // namespace flowembed

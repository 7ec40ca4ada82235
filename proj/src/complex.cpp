#include "flowembed/complex.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "flowembed/csv.hpp"
#include "flowembed/error.hpp"

namespace flowembed {

namespace {

std::string describe(std::initializer_list<VertexId> vertices) {
  std::string out = "(";
  bool first = true;
  for (VertexId v : vertices) {
    if (!first) out += ",";
    out += std::to_string(v + 1);
    first = false;
  }
  return out + ")";
}

}  // namespace

SimplicialComplex SimplicialComplex::build(std::size_t vertex_count,
                                           std::span<const std::array<VertexId, 2>> edges,
                                           std::span<const std::array<VertexId, 3>> triangles) {
  SimplicialComplex sc;
  sc.vertex_count_ = vertex_count;

  sc.edges_.reserve(edges.size());
  for (const auto& e : edges) {
    if (e[0] >= vertex_count || e[1] >= vertex_count) {
      throw Error(ErrorKind::MissingFace,
                  "edge " + describe({e[0], e[1]}) + " references a vertex outside 1.." +
                      std::to_string(vertex_count));
    }
    if (e[0] == e[1]) {
      throw Error(ErrorKind::InvalidArgument, "edge " + describe({e[0], e[1]}) + " is a loop");
    }
    sc.edges_.push_back({std::min(e[0], e[1]), std::max(e[0], e[1])});
  }
  std::sort(sc.edges_.begin(), sc.edges_.end());
  if (auto dup = std::adjacent_find(sc.edges_.begin(), sc.edges_.end()); dup != sc.edges_.end()) {
    throw Error(ErrorKind::DuplicateSimplex, "edge " + describe({dup->tail, dup->head}) + " listed twice");
  }
  sc.edge_index_.reserve(sc.edges_.size());
  for (std::size_t i = 0; i < sc.edges_.size(); ++i) {
    sc.edge_index_.emplace(key(sc.edges_[i].tail, sc.edges_[i].head), i);
  }

  sc.triangles_.reserve(triangles.size());
  for (const auto& t : triangles) {
    std::array<VertexId, 3> v = t;
    std::sort(v.begin(), v.end());
    if (v[0] == v[1] || v[1] == v[2]) {
      throw Error(ErrorKind::InvalidArgument,
                  "triangle " + describe({t[0], t[1], t[2]}) + " repeats a vertex");
    }
    if (v[2] >= vertex_count) {
      throw Error(ErrorKind::MissingFace,
                  "triangle " + describe({t[0], t[1], t[2]}) + " references an absent vertex");
    }
    for (auto [u, w] : {std::pair{v[0], v[1]}, std::pair{v[1], v[2]}, std::pair{v[0], v[2]}}) {
      if (!sc.edge_index_.contains(key(u, w))) {
        throw Error(ErrorKind::MissingFace, "triangle " + describe({t[0], t[1], t[2]}) +
                                                " lacks boundary edge " + describe({u, w}));
      }
    }
    sc.triangles_.push_back({v[0], v[1], v[2]});
  }
  std::sort(sc.triangles_.begin(), sc.triangles_.end());
  if (auto dup = std::adjacent_find(sc.triangles_.begin(), sc.triangles_.end());
      dup != sc.triangles_.end()) {
    throw Error(ErrorKind::DuplicateSimplex,
                "triangle " + describe({dup->a, dup->b, dup->c}) + " listed twice");
  }

  // CSR adjacency, neighbors ascending.
  std::vector<std::size_t> degree(vertex_count + 1, 0);
  for (const auto& e : sc.edges_) {
    ++degree[e.tail];
    ++degree[e.head];
  }
  sc.adjacency_offsets_.assign(vertex_count + 1, 0);
  for (std::size_t v = 0; v < vertex_count; ++v) {
    sc.adjacency_offsets_[v + 1] = sc.adjacency_offsets_[v] + degree[v];
  }
  sc.adjacency_.resize(2 * sc.edges_.size());
  std::vector<std::size_t> fill(sc.adjacency_offsets_.begin(), sc.adjacency_offsets_.end() - 1);
  for (std::size_t i = 0; i < sc.edges_.size(); ++i) {
    const auto& e = sc.edges_[i];
    sc.adjacency_[fill[e.tail]++] = {e.head, i};
    sc.adjacency_[fill[e.head]++] = {e.tail, i};
  }
  for (std::size_t v = 0; v < vertex_count; ++v) {
    std::sort(sc.adjacency_.begin() + static_cast<std::ptrdiff_t>(sc.adjacency_offsets_[v]),
              sc.adjacency_.begin() + static_cast<std::ptrdiff_t>(sc.adjacency_offsets_[v + 1]),
              [](const Neighbor& x, const Neighbor& y) { return x.vertex < y.vertex; });
  }

  sc.edge_triangles_.assign(sc.edges_.size(), {});
  for (std::size_t t = 0; t < sc.triangles_.size(); ++t) {
    const auto& tri = sc.triangles_[t];
    sc.edge_triangles_[*sc.edge_index(tri.a, tri.b)].push_back(t);
    sc.edge_triangles_[*sc.edge_index(tri.b, tri.c)].push_back(t);
    sc.edge_triangles_[*sc.edge_index(tri.a, tri.c)].push_back(t);
  }
  return sc;
}

std::optional<std::size_t> SimplicialComplex::edge_index(VertexId u, VertexId v) const {
  if (u > v) std::swap(u, v);
  auto it = edge_index_.find(key(u, v));
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const Neighbor> SimplicialComplex::neighbors(VertexId v) const {
  if (v >= vertex_count_) return {};
  return std::span<const Neighbor>(adjacency_.data() + adjacency_offsets_[v],
                                   adjacency_offsets_[v + 1] - adjacency_offsets_[v]);
}

SimplicialComplex SimplicialComplex::induced_subcomplex(
    const std::vector<bool>& keep, std::vector<std::optional<VertexId>>* old_to_new) const {
  std::vector<std::optional<VertexId>> map(vertex_count_);
  VertexId next = 0;
  for (std::size_t v = 0; v < vertex_count_; ++v) {
    if (v < keep.size() && keep[v]) map[v] = next++;
  }
  std::vector<std::array<VertexId, 2>> edges;
  for (const auto& e : edges_) {
    if (map[e.tail] && map[e.head]) edges.push_back({*map[e.tail], *map[e.head]});
  }
  std::vector<std::array<VertexId, 3>> tris;
  for (const auto& t : triangles_) {
    if (map[t.a] && map[t.b] && map[t.c]) tris.push_back({*map[t.a], *map[t.b], *map[t.c]});
  }
  if (old_to_new) *old_to_new = map;
  return build(next, edges, tris);
}

std::size_t SimplicialComplex::connected_components() const {
  std::vector<std::size_t> parent(vertex_count_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t components = vertex_count_;
  for (const auto& e : edges_) {
    auto a = find(e.tail);
    auto b = find(e.head);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components;
}

IncidenceMatrix boundary_1(const SimplicialComplex& sc) {
  IncidenceMatrix b1(static_cast<Eigen::Index>(sc.vertex_count()),
                     static_cast<Eigen::Index>(sc.edge_count()));
  std::vector<Eigen::Triplet<int>> entries;
  entries.reserve(2 * sc.edge_count());
  for (std::size_t i = 0; i < sc.edge_count(); ++i) {
    const auto& e = sc.edges()[i];
    const auto col = static_cast<Eigen::Index>(i);
    entries.emplace_back(static_cast<Eigen::Index>(e.tail), col, -1);
    entries.emplace_back(static_cast<Eigen::Index>(e.head), col, 1);
  }
  b1.setFromTriplets(entries.begin(), entries.end());
  return b1;
}

IncidenceMatrix boundary_2(const SimplicialComplex& sc) {
  IncidenceMatrix b2(static_cast<Eigen::Index>(sc.edge_count()),
                     static_cast<Eigen::Index>(sc.triangle_count()));
  std::vector<Eigen::Triplet<int>> entries;
  entries.reserve(3 * sc.triangle_count());
  for (std::size_t j = 0; j < sc.triangle_count(); ++j) {
    const auto& t = sc.triangles()[j];
    const auto col = static_cast<Eigen::Index>(j);
    entries.emplace_back(static_cast<Eigen::Index>(*sc.edge_index(t.a, t.b)), col, 1);
    entries.emplace_back(static_cast<Eigen::Index>(*sc.edge_index(t.b, t.c)), col, 1);
    entries.emplace_back(static_cast<Eigen::Index>(*sc.edge_index(t.a, t.c)), col, -1);
  }
  b2.setFromTriplets(entries.begin(), entries.end());
  return b2;
}

HodgeLaplacian hodge_laplacian(const SimplicialComplex& sc) {
  const IncidenceMatrix b1 = boundary_1(sc);
  const IncidenceMatrix b2 = boundary_2(sc);
  // Integer assembly keeps the operator exact before the cast.
  IncidenceMatrix down = IncidenceMatrix(b1.transpose()) * b1;
  IncidenceMatrix up = b2 * IncidenceMatrix(b2.transpose());
  IncidenceMatrix sum = down + up;
  sum.prune(0);
  return sum.cast<double>();
}

SimplicialComplex disjoint_union(const SimplicialComplex& first, const SimplicialComplex& second) {
  const auto offset = static_cast<VertexId>(first.vertex_count());
  std::vector<std::array<VertexId, 2>> edges;
  std::vector<std::array<VertexId, 3>> tris;
  for (const auto& e : first.edges()) edges.push_back({e.tail, e.head});
  for (const auto& e : second.edges()) edges.push_back({e.tail + offset, e.head + offset});
  for (const auto& t : first.triangles()) tris.push_back({t.a, t.b, t.c});
  for (const auto& t : second.triangles()) tris.push_back({t.a + offset, t.b + offset, t.c + offset});
  return SimplicialComplex::build(first.vertex_count() + second.vertex_count(), edges, tris);
}

std::string complex_to_json(const SimplicialComplex& sc) {
  nlohmann::json doc;
  doc["vertices"] = sc.vertex_count();
  auto edges = nlohmann::json::array();
  for (const auto& e : sc.edges()) edges.push_back({e.tail + 1, e.head + 1});
  auto tris = nlohmann::json::array();
  for (const auto& t : sc.triangles()) tris.push_back({t.a + 1, t.b + 1, t.c + 1});
  doc["edges"] = std::move(edges);
  doc["triangles"] = std::move(tris);
  return doc.dump() + "\n";
}

SimplicialComplex complex_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("complex JSON: ") + e.what());
  }
  auto read_id = [](const nlohmann::json& value, std::size_t n) -> VertexId {
    if (!value.is_number_integer()) throw Error(ErrorKind::ParseError, "vertex ids must be integers");
    const auto id = value.get<long long>();
    if (id < 1 || static_cast<std::size_t>(id) > n) {
      throw Error(ErrorKind::MissingFace,
                  "vertex id " + std::to_string(id) + " outside 1.." + std::to_string(n));
    }
    return static_cast<VertexId>(id - 1);
  };
  try {
    if (!doc.is_object() || !doc.contains("vertices")) {
      throw Error(ErrorKind::ParseError, "complex JSON needs a \"vertices\" count");
    }
    const auto n = doc.at("vertices").get<std::size_t>();
    std::vector<std::array<VertexId, 2>> edges;
    std::vector<std::array<VertexId, 3>> tris;
    if (doc.contains("edges")) {
      for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw Error(ErrorKind::ParseError, "edges must be pairs");
        edges.push_back({read_id(e[0], n), read_id(e[1], n)});
      }
    }
    if (doc.contains("triangles")) {
      for (const auto& t : doc.at("triangles")) {
        if (!t.is_array() || t.size() != 3) {
          throw Error(ErrorKind::ParseError, "triangles must be triples");
        }
        tris.push_back({read_id(t[0], n), read_id(t[1], n), read_id(t[2], n)});
      }
    }
    return SimplicialComplex::build(n, edges, tris);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("complex JSON: ") + e.what());
  }
}

void write_complex_file(const SimplicialComplex& sc, const std::filesystem::path& path) {
  write_text_file(path, complex_to_json(sc));
}

SimplicialComplex read_complex_file(const std::filesystem::path& path) {
  return complex_from_json(read_text_file(path));
}

}  // namespace flowembed

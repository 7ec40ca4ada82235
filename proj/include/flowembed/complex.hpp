#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace flowembed {

/// Dense 0-based vertex index. File formats use 1-based ids and translate at the boundary.
using VertexId = std::uint32_t;

/// Edge in reference orientation: tail < head.
struct OrientedEdge {
  VertexId tail = 0;
  VertexId head = 0;
  auto operator<=>(const OrientedEdge&) const = default;
};

/// Triangle in reference orientation: a < b < c.
struct OrientedTriangle {
  VertexId a = 0;
  VertexId b = 0;
  VertexId c = 0;
  auto operator<=>(const OrientedTriangle&) const = default;
};

/// Real signal indexed by edges in canonical order (f(i,j) = -f(j,i) implicit).
using EdgeFlow = Eigen::VectorXd;

/// Signed incidence matrix with entries in {-1, 0, +1}.
using IncidenceMatrix = Eigen::SparseMatrix<int>;
/// Hodge 1-Laplacian B1^T B1 + B2 B2^T over edges.
using HodgeLaplacian = Eigen::SparseMatrix<double>;

struct Neighbor {
  VertexId vertex;
  std::size_t edge;
};

/// A 2-dimensional simplicial complex with canonically ordered simplices.
/// Immutable after construction.
class SimplicialComplex {
 public:
  SimplicialComplex() = default;

  /// Canonicalizes every simplex to increasing vertex order, sorts edges and
  /// triangles lexicographically and checks downward closure. Throws
  /// MissingFace, DuplicateSimplex or InvalidArgument.
  static SimplicialComplex build(std::size_t vertex_count,
                                 std::span<const std::array<VertexId, 2>> edges,
                                 std::span<const std::array<VertexId, 3>> triangles);

  std::size_t vertex_count() const noexcept { return vertex_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t triangle_count() const noexcept { return triangles_.size(); }

  const std::vector<OrientedEdge>& edges() const noexcept { return edges_; }
  const std::vector<OrientedTriangle>& triangles() const noexcept { return triangles_; }

  /// Column of the edge {u, v} (either order), if present.
  std::optional<std::size_t> edge_index(VertexId u, VertexId v) const;

  /// Neighbors of v sorted by vertex id.
  std::span<const Neighbor> neighbors(VertexId v) const;

  /// Triangles incident to each edge.
  const std::vector<std::vector<std::size_t>>& edge_triangles() const noexcept {
    return edge_triangles_;
  }

  /// Keep only the vertices with keep[v] == true together with every simplex
  /// spanned by them. `old_to_new` receives the renumbering (nullopt for removed vertices).
  SimplicialComplex induced_subcomplex(const std::vector<bool>& keep,
                                       std::vector<std::optional<VertexId>>* old_to_new = nullptr) const;

  /// Number of connected components of the 1-skeleton (isolated vertices count).
  std::size_t connected_components() const;

 private:
  static std::uint64_t key(VertexId u, VertexId v) {
    return (static_cast<std::uint64_t>(u) << 32) | v;
  }

  std::size_t vertex_count_ = 0;
  std::vector<OrientedEdge> edges_;
  std::vector<OrientedTriangle> triangles_;
  std::unordered_map<std::uint64_t, std::size_t> edge_index_;
  std::vector<std::size_t> adjacency_offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<std::vector<std::size_t>> edge_triangles_;
};

/// Vertex-to-edge incidence: -1 at the tail row, +1 at the head row.
IncidenceMatrix boundary_1(const SimplicialComplex& sc);

/// Edge-to-triangle incidence for (a, b, c) traversed a->b->c->a:
/// +1 on (a,b) and (b,c), -1 on (a,c).
IncidenceMatrix boundary_2(const SimplicialComplex& sc);

HodgeLaplacian hodge_laplacian(const SimplicialComplex& sc);

/// Complex with the vertices of `second` appended after those of `first`.
SimplicialComplex disjoint_union(const SimplicialComplex& first, const SimplicialComplex& second);

// JSON file format: {"vertices": N, "edges": [[a,b],...], "triangles": [[a,b,c],...]}, 1-based.
std::string complex_to_json(const SimplicialComplex& sc);
SimplicialComplex complex_from_json(const std::string& text);
void write_complex_file(const SimplicialComplex& sc, const std::filesystem::path& path);
SimplicialComplex read_complex_file(const std::filesystem::path& path);

}  // namespace flowembed

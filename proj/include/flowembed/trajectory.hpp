#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "flowembed/complex.hpp"
#include "flowembed/spectral.hpp"

namespace flowembed {

/// A walk on a complex: consecutive vertices must be adjacent.
struct TrajectoryPath {
  std::string id;
  std::vector<VertexId> vertices;
};

/// Point in harmonic coordinates, dimension beta_1.
using EmbeddedPoint = Eigen::VectorXd;
/// One point per prefix of the walk, starting at the origin.
using EmbeddedPolyline = std::vector<EmbeddedPoint>;

/// +1 per traversal along the reference orientation, -1 against, summed over
/// repeated traversals. Throws NotAnEdge, or InvalidArgument for fewer than 2 vertices.
EdgeFlow path_to_flow(const SimplicialComplex& sc, std::span<const VertexId> path);

/// H^T f. Throws DimensionMismatch.
EmbeddedPoint flatten_embed(const HarmonicBasis& h, const EdgeFlow& f);

EmbeddedPolyline incremental_embed(const HarmonicBasis& h, const SimplicialComplex& sc,
                                   std::span<const VertexId> path);

/// Throws NotAnEdge naming the offending step.
void validate_walk(const SimplicialComplex& sc, std::span<const VertexId> path);

/// Concatenation that drops the duplicated junction vertex.
std::vector<VertexId> concatenate_paths(std::span<const VertexId> first, std::span<const VertexId> second);

// Trajectory CSV: trajectory_id,seq,vertex with 1-based vertices. Trajectories
// keep the order of first appearance; rows within one are ordered by seq.
std::string trajectories_to_csv(std::span<const TrajectoryPath> trajectories);
std::vector<TrajectoryPath> trajectories_from_csv(const std::string& text);
void write_trajectories_file(std::span<const TrajectoryPath> trajectories, const std::filesystem::path& path);
std::vector<TrajectoryPath> read_trajectories_file(const std::filesystem::path& path);

/// Rows of flattened embeddings, one per trajectory.
struct EmbeddingTable {
  std::vector<std::string> ids;
  Eigen::MatrixXd points;  // n x beta_1
  /// Optional per-row label; empty when the column is absent.
  std::vector<std::string> labels;
};

// Embedding CSV: trajectory_id,dim_0,...,dim_{k-1}[,label]
std::string embeddings_to_csv(const EmbeddingTable& table);
EmbeddingTable embeddings_from_csv(const std::string& text);

}  // namespace flowembed

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flowembed/complex.hpp"
#include "flowembed/delaunay.hpp"
#include "flowembed/rng.hpp"
#include "flowembed/spectral.hpp"
#include "flowembed/trajectory.hpp"

namespace flowembed {

struct Box {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  bool contains(Point2 p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

struct HoleSpec {
  Point2 center;
  double radius = 0.12;
};

/// One trajectory class: departure area, arrival area, number of walks.
struct ClassSpec {
  Box source;
  Box target;
  std::size_t count = 40;
};

struct SyntheticConfig {
  std::size_t point_count = 1000;
  std::vector<HoleSpec> holes = default_holes();
  std::vector<ClassSpec> classes = default_classes();
  std::size_t outlier_count = 5;
  /// Multiplier applied to the weight of every edge on the previous path.
  double weight_growth = 1.2;
  std::uint64_t seed = 0;
  /// Random waypoints tried per planted outlier.
  std::size_t outlier_candidates = 32;

  static std::vector<HoleSpec> default_holes();
  static std::vector<ClassSpec> default_classes();
};

/// Throws InvalidArgument when a count, region or hole is out of range.
void validate(const SyntheticConfig& config);

constexpr int kOutlierLabel = -1;

struct LabeledDataset {
  SimplicialComplex complex;
  std::vector<Point2> coords;
  std::vector<TrajectoryPath> trajectories;
  /// Class index per trajectory, kOutlierLabel for planted outliers.
  std::vector<int> labels;

  std::vector<bool> outlier_mask() const;
};

struct PunchedComplex {
  SimplicialComplex complex;
  std::vector<Point2> coords;
};

/// Removes every vertex within a hole's radius together with its incident
/// simplices. Throws HoleSwallowsBoundary when a removed vertex lies on the
/// boundary of the complex, DisconnectedResult when the remainder falls apart,
/// and HoleCountMismatch when beta_1 of the result differs from the hole count
/// (overlapping or empty holes).
PunchedComplex punch_holes(const SimplicialComplex& sc, std::span<const Point2> coords,
                           std::span<const HoleSpec> holes);

std::vector<VertexId> vertices_in_box(std::span<const Point2> coords, const Box& box);

/// Edge weights equal to Euclidean edge lengths.
std::vector<double> euclidean_weights(const SimplicialComplex& sc, std::span<const Point2> coords);

/// Dijkstra on edge weights; equal-distance ties settle the lower vertex id first
/// and predecessors change only on strict improvement. Throws Unreachable.
std::vector<VertexId> shortest_path(const SimplicialComplex& sc, std::span<const double> weights,
                                    VertexId source, VertexId target);

/// `count` walks between vertices drawn from `sources` and `targets`. After
/// each walk the weights of its edges are multiplied by `weight_growth`.
/// Throws Unreachable, or InvalidArgument for empty regions.
std::vector<TrajectoryPath> generate_class(const SimplicialComplex& sc, std::vector<double> weights,
                                           std::span<const VertexId> sources,
                                           std::span<const VertexId> targets, std::size_t count,
                                           double weight_growth, Rng& rng);

/// Where trajectory classes sit in harmonic space; input to outlier planting.
struct ClassGeometry {
  std::vector<VertexId> sources;
  std::vector<VertexId> targets;
  /// Flattened embeddings of the members.
  std::vector<EmbeddedPoint> members;
  EmbeddedPoint centroid;
  /// Largest distance of a class member to the centroid.
  double spread = 0.0;
};

ClassGeometry describe_class(const SimplicialComplex& sc, const HarmonicBasis& basis,
                             std::span<const TrajectoryPath> members, std::vector<VertexId> sources,
                             std::vector<VertexId> targets);

/// Planted outliers: the endpoints of a random class joined through a random
/// waypoint, src -> waypoint -> dst along base-weight shortest paths. A
/// candidate is "clear" when its flattened embedding lies farther from every
/// class centroid than that class's spread. Among `candidates` waypoints per
/// round, the best candidate is the clear one (if any) with the largest
/// distance to the nearest already embedded trajectory, class members and
/// previously planted outliers alike. Rounds (at most 8) repeat with fresh
/// endpoints until the best candidate is clear. Throws Unreachable, or
/// InvalidArgument when beta_1 = 0 or no class is given.
std::vector<TrajectoryPath> plant_outliers(const SimplicialComplex& sc, std::span<const double> base_weights,
                                           const HarmonicBasis& basis,
                                           std::span<const ClassGeometry> classes,
                                           std::size_t outlier_count, std::size_t candidates, Rng& rng);

/// Deterministic for a fixed seed. Trajectory ids are "1".."N": classes in
/// order, then outliers.
LabeledDataset generate_dataset(const SyntheticConfig& config);

// Coordinates CSV: vertex,x,y (1-based vertices). Labels CSV: trajectory_id,label,is_outlier.
std::string coords_to_csv(std::span<const Point2> coords);
std::vector<Point2> coords_from_csv(const std::string& text);
std::string labels_to_csv(const LabeledDataset& dataset);

struct LabelRow {
  std::string id;
  int label = 0;
  bool outlier = false;
};
std::vector<LabelRow> labels_from_csv(const std::string& text);

}  // namespace flowembed

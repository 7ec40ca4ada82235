#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "flowembed/complex.hpp"
#include "flowembed/delaunay.hpp"
#include "flowembed/outlier.hpp"
#include "flowembed/trajectory.hpp"

namespace flowembed {

// SVG renderers. Labels are class indices with kOutlierLabel (-1) drawn in
// red; an empty label span draws everything in the first class color. Empty
// inputs produce empty axes.

/// The complex in the plane with trajectories overlaid.
std::string map_svg(const SimplicialComplex& sc, std::span<const Point2> coords,
                    std::span<const TrajectoryPath> trajectories, std::span<const int> labels);

/// Flattened embeddings as points (first two dimensions; missing ones read as
/// zero), optionally with incremental polylines.
std::string embedding_svg(const Eigen::MatrixXd& points, std::span<const int> labels,
                          std::span<const EmbeddedPolyline> polylines = {});

/// Detection result. LOF draws a circle per point whose radius grows with the
/// score; Isolation Forest shades the decision grid behind the points.
/// Flagged points are red.
std::string detection_svg(const Eigen::MatrixXd& points, std::span<const double> scores,
                          const std::vector<bool>& flagged, Detector detector,
                          std::span<const GridSample> grid = {});

}  // namespace flowembed

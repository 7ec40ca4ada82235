#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowembed/complex.hpp"
#include "flowembed/delaunay.hpp"
#include "flowembed/trajectory.hpp"

namespace flowembed {

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

struct GeoBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;
};

/// Land polygons as a flat list of closed rings in (lat, lon) degrees.
/// Membership uses the even-odd rule over all rings, so holes need no
/// special handling.
struct LandMask {
  std::vector<std::vector<GeoPoint>> rings;

  bool contains(GeoPoint p) const;
};

/// Accepts a FeatureCollection, a Feature or a bare Polygon/MultiPolygon
/// geometry. Coordinates are [lon, lat]. Throws ParseError.
LandMask land_mask_from_geojson(const std::string& text);
LandMask read_land_mask_file(const std::filesystem::path& path);

struct HexCell {
  int row = 0;
  int col = 0;
};

/// Pointy-top hexagons in odd-row offset layout over a planar chart
/// x = (lon - lon_min) cos(mid_lat), y = lat - lat_min, both in degrees of
/// latitude. `cell_width` is the distance between the centers of neighbors
/// within a row; rows are sqrt(3)/2 * cell_width apart.
class HexGrid {
 public:
  /// Throws EmptyGrid for an empty or non-finite box or a non-positive width.
  static HexGrid build(const GeoBox& bbox, double cell_width_deg = 0.86);

  /// Removes every cell whose center and six corners all lie on land.
  /// Throws AllCellsRemoved.
  HexGrid masked(const LandMask& land) const;

  const SimplicialComplex& complex() const noexcept { return complex_; }
  const GeoBox& bbox() const noexcept { return bbox_; }
  double cell_width() const noexcept { return width_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  std::size_t cell_count() const noexcept { return cells_.size(); }
  const std::vector<HexCell>& cells() const noexcept { return cells_; }
  const std::vector<GeoPoint>& centers() const noexcept { return centers_; }

  std::optional<VertexId> vertex_at(int row, int col) const;
  std::array<GeoPoint, 6> corners(VertexId v) const;

  Point2 to_plane(GeoPoint p) const;
  GeoPoint from_plane(Point2 p) const;

  /// Nearest live cell center in the planar chart, ties to the lower id.
  /// Empty when that center is more than two cell widths away.
  std::optional<VertexId> nearest_cell(GeoPoint p) const;

 private:
  Point2 cell_center(int row, int col) const;

  GeoBox bbox_;
  double width_ = 0.0;
  double lon_scale_ = 1.0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<HexCell> cells_;
  std::vector<GeoPoint> centers_;
  /// row * cols + col -> live vertex id, or -1.
  std::vector<std::int64_t> lookup_;
  SimplicialComplex complex_;
};

inline HexGrid build_hex_grid(const GeoBox& bbox, double cell_width_deg = 0.86) {
  return HexGrid::build(bbox, cell_width_deg);
}

inline HexGrid apply_land_mask(const HexGrid& grid, const LandMask& land) { return grid.masked(land); }

struct TrackPoint {
  /// Milliseconds since 1970-01-01T00:00:00 UTC.
  std::int64_t timestamp_ms = 0;
  double lat = 0.0;
  double lon = 0.0;
  std::string individual_id;
};

struct Track {
  std::string individual_id;
  std::vector<TrackPoint> points;
};

/// Snap each point to its nearest live cell, drop repeats, and bridge jumps
/// between non-adjacent cells with the hop-shortest path that is
/// lexicographically smallest. Throws PointOutsideGrid, NoBridgePath, or
/// DegenerateTrack when fewer than two distinct cells remain.
TrajectoryPath discretize_track(const HexGrid& grid, std::span<const TrackPoint> points,
                                const std::string& id = {});

/// Hop-shortest path from a to b, lexicographically smallest among ties.
/// Throws NoBridgePath.
std::vector<VertexId> bridge_path(const SimplicialComplex& sc, VertexId a, VertexId b);

/// Header names used to read a track CSV.
struct TrackColumns {
  std::string timestamp = "timestamp";
  std::string lat = "location-lat";
  std::string lon = "location-long";
  std::string individual = "individual-local-identifier";
};

/// Reads `key=value` lines (keys timestamp, lat, lon, individual); '#'
/// starts a comment. Throws ParseError on unknown keys.
TrackColumns parse_column_mapping(const std::string& text);

/// "YYYY-MM-DD[ T]HH:MM[:SS[.fff]][Z]" or a bare date. Empty on failure.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

/// Tracks in order of first appearance, each sorted by time (stable).
/// Rows with both coordinates empty are skipped as missing fixes.
/// Throws MissingColumn, or ParseError naming the line.
std::vector<Track> tracks_from_csv(const std::string& text, const TrackColumns& columns = {});
std::vector<Track> ingest_tracks_csv(const std::filesystem::path& path, const TrackColumns& columns = {});

/// `vertex,lat,lon` with 1-based vertices.
std::string centers_to_csv(const HexGrid& grid);

}  // namespace flowembed

#include "flowembed/geo.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <unordered_map>

#include <json.hpp>

#include "flowembed/csv.hpp"
#include "flowembed/error.hpp"

namespace flowembed {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
const double kRowFactor = std::sqrt(3.0) / 2.0;

bool ring_contains(const std::vector<GeoPoint>& ring, GeoPoint p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const GeoPoint& a = ring[i];
    const GeoPoint& b = ring[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double lon_cross = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < lon_cross) inside = !inside;
    }
  }
  return inside;
}

GeoPoint parse_position(const nlohmann::json& pos) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
    throw Error(ErrorKind::ParseError, "GeoJSON position must be [lon, lat]");
  return {pos[1].get<double>(), pos[0].get<double>()};
}

void collect_polygon(const nlohmann::json& rings, LandMask& mask) {
  if (!rings.is_array()) throw Error(ErrorKind::ParseError, "Polygon coordinates must be an array of rings");
  for (const auto& ring_json : rings) {
    if (!ring_json.is_array()) throw Error(ErrorKind::ParseError, "ring must be an array of positions");
    std::vector<GeoPoint> ring;
    ring.reserve(ring_json.size());
    for (const auto& pos : ring_json) ring.push_back(parse_position(pos));
    if (ring.size() >= 2 && ring.front().lat == ring.back().lat && ring.front().lon == ring.back().lon)
      ring.pop_back();
    if (ring.size() < 3) throw Error(ErrorKind::ParseError, "ring needs at least 3 distinct positions");
    mask.rings.push_back(std::move(ring));
  }
}

void collect_geojson(const nlohmann::json& node, LandMask& mask) {
  if (node.is_null()) return;
  if (!node.is_object() || !node.contains("type") || !node["type"].is_string())
    throw Error(ErrorKind::ParseError, "GeoJSON object without a type");
  const std::string type = node["type"].get<std::string>();
  if (type == "FeatureCollection") {
    if (!node.contains("features") || !node["features"].is_array())
      throw Error(ErrorKind::ParseError, "FeatureCollection without features");
    for (const auto& feature : node["features"]) collect_geojson(feature, mask);
  } else if (type == "Feature") {
    if (node.contains("geometry")) collect_geojson(node["geometry"], mask);
  } else if (type == "GeometryCollection") {
    if (!node.contains("geometries") || !node["geometries"].is_array())
      throw Error(ErrorKind::ParseError, "GeometryCollection without geometries");
    for (const auto& g : node["geometries"]) collect_geojson(g, mask);
  } else if (type == "Polygon") {
    if (!node.contains("coordinates")) throw Error(ErrorKind::ParseError, "Polygon without coordinates");
    collect_polygon(node["coordinates"], mask);
  } else if (type == "MultiPolygon") {
    if (!node.contains("coordinates") || !node["coordinates"].is_array())
      throw Error(ErrorKind::ParseError, "MultiPolygon without coordinates");
    for (const auto& polygon : node["coordinates"]) collect_polygon(polygon, mask);
  } else {
    throw Error(ErrorKind::ParseError, "unsupported GeoJSON type '" + type + "' in land mask");
  }
}

}  // namespace

bool LandMask::contains(GeoPoint p) const {
  bool inside = false;
  for (const auto& ring : rings)
    if (ring_contains(ring, p)) inside = !inside;
  return inside;
}

LandMask land_mask_from_geojson(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("land mask: ") + e.what());
  }
  LandMask mask;
  collect_geojson(doc, mask);
  return mask;
}

LandMask read_land_mask_file(const std::filesystem::path& path) {
  return land_mask_from_geojson(read_text_file(path));
}

HexGrid HexGrid::build(const GeoBox& bbox, double cell_width_deg) {
  const bool finite = std::isfinite(bbox.lat_min) && std::isfinite(bbox.lat_max) &&
                      std::isfinite(bbox.lon_min) && std::isfinite(bbox.lon_max) &&
                      std::isfinite(cell_width_deg);
  if (!finite || cell_width_deg <= 0.0 || bbox.lat_max < bbox.lat_min || bbox.lon_max < bbox.lon_min)
    throw Error(ErrorKind::EmptyGrid, "bounding box is empty or cell width is not positive");
  if (bbox.lat_min < -90.0 || bbox.lat_max > 90.0)
    throw Error(ErrorKind::EmptyGrid, "latitude range outside [-90, 90]");

  HexGrid grid;
  grid.bbox_ = bbox;
  grid.width_ = cell_width_deg;
  grid.lon_scale_ = std::cos(0.5 * (bbox.lat_min + bbox.lat_max) * kDegToRad);
  if (grid.lon_scale_ < 1e-9) throw Error(ErrorKind::EmptyGrid, "bounding box centered on a pole");

  const double row_step = kRowFactor * cell_width_deg;
  const double x_span = (bbox.lon_max - bbox.lon_min) * grid.lon_scale_;
  const double y_span = bbox.lat_max - bbox.lat_min;
  const double rows = std::floor(y_span / row_step + 1e-9) + 1.0;
  const double cols = std::floor(x_span / cell_width_deg + 1e-9) + 1.0;
  if (rows * cols > 2.0e7) throw Error(ErrorKind::InvalidArgument, "hex grid would exceed 2e7 cells");
  grid.rows_ = static_cast<int>(rows);
  grid.cols_ = static_cast<int>(cols);

  const auto id = [&](int r, int c) { return static_cast<VertexId>(r * grid.cols_ + c); };
  const std::size_t n = static_cast<std::size_t>(grid.rows_) * grid.cols_;
  grid.cells_.reserve(n);
  grid.centers_.reserve(n);
  grid.lookup_.resize(n);
  for (int r = 0; r < grid.rows_; ++r) {
    for (int c = 0; c < grid.cols_; ++c) {
      grid.lookup_[id(r, c)] = id(r, c);
      grid.cells_.push_back({r, c});
      grid.centers_.push_back(grid.from_plane(grid.cell_center(r, c)));
    }
  }

  // Each cell links to its right neighbor and its two neighbors in the next
  // row; the two triangles per cell close the gaps between those rows.
  std::vector<std::array<VertexId, 2>> edges;
  std::vector<std::array<VertexId, 3>> triangles;
  for (int r = 0; r < grid.rows_; ++r) {
    for (int c = 0; c < grid.cols_; ++c) {
      const bool right = c + 1 < grid.cols_;
      if (right) edges.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 >= grid.rows_) continue;
      const int lo = (r % 2 == 1) ? c : c - 1;
      const int hi = lo + 1;
      const bool has_lo = lo >= 0;
      const bool has_hi = hi < grid.cols_;
      if (has_lo) edges.push_back({id(r, c), id(r + 1, lo)});
      if (has_hi) edges.push_back({id(r, c), id(r + 1, hi)});
      if (has_lo && has_hi) triangles.push_back({id(r, c), id(r + 1, lo), id(r + 1, hi)});
      if (right && has_hi) triangles.push_back({id(r, c), id(r, c + 1), id(r + 1, hi)});
    }
  }
  grid.complex_ = SimplicialComplex::build(n, edges, triangles);
  return grid;
}

Point2 HexGrid::cell_center(int row, int col) const {
  const double shift = (row % 2 == 1) ? 0.5 * width_ : 0.0;
  return {col * width_ + shift, row * kRowFactor * width_};
}

Point2 HexGrid::to_plane(GeoPoint p) const {
  return {(p.lon - bbox_.lon_min) * lon_scale_, p.lat - bbox_.lat_min};
}

GeoPoint HexGrid::from_plane(Point2 p) const {
  return {bbox_.lat_min + p.y, bbox_.lon_min + p.x / lon_scale_};
}

std::optional<VertexId> HexGrid::vertex_at(int row, int col) const {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_) return std::nullopt;
  const std::int64_t v = lookup_[static_cast<std::size_t>(row) * cols_ + col];
  if (v < 0) return std::nullopt;
  return static_cast<VertexId>(v);
}

std::array<GeoPoint, 6> HexGrid::corners(VertexId v) const {
  const Point2 c = to_plane(centers_.at(v));
  const double radius = width_ / std::sqrt(3.0);
  std::array<GeoPoint, 6> out;
  for (int k = 0; k < 6; ++k) {
    const double angle = (30.0 + 60.0 * k) * kDegToRad;
    out[k] = from_plane({c.x + radius * std::cos(angle), c.y + radius * std::sin(angle)});
  }
  return out;
}

HexGrid HexGrid::masked(const LandMask& land) const {
  std::vector<bool> keep(cells_.size(), true);
  std::size_t kept = 0;
  for (VertexId v = 0; v < cells_.size(); ++v) {
    bool on_land = land.contains(centers_[v]);
    if (on_land) {
      for (const GeoPoint& corner : corners(v)) {
        if (!land.contains(corner)) {
          on_land = false;
          break;
        }
      }
    }
    keep[v] = !on_land;
    kept += keep[v] ? 1 : 0;
  }
  if (kept == 0) throw Error(ErrorKind::AllCellsRemoved, "the land mask covers every cell of the grid");

  HexGrid out;
  out.bbox_ = bbox_;
  out.width_ = width_;
  out.lon_scale_ = lon_scale_;
  out.rows_ = rows_;
  out.cols_ = cols_;
  std::vector<std::optional<VertexId>> old_to_new;
  out.complex_ = complex_.induced_subcomplex(keep, &old_to_new);
  out.lookup_.assign(lookup_.size(), -1);
  out.cells_.reserve(kept);
  out.centers_.reserve(kept);
  for (VertexId v = 0; v < cells_.size(); ++v) {
    if (!old_to_new[v]) continue;
    const HexCell cell = cells_[v];
    out.lookup_[static_cast<std::size_t>(cell.row) * cols_ + cell.col] = *old_to_new[v];
    out.cells_.push_back(cell);
    out.centers_.push_back(centers_[v]);
  }
  return out;
}

std::optional<VertexId> HexGrid::nearest_cell(GeoPoint p) const {
  const Point2 q = to_plane(p);
  const double row_step = kRowFactor * width_;
  const double r_guess = std::round(q.y / row_step);
  if (!std::isfinite(r_guess) || r_guess < -4.0 || r_guess > rows_ + 3.0) return std::nullopt;
  const int r0 = static_cast<int>(r_guess);

  std::optional<VertexId> best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int r = r0 - 3; r <= r0 + 3; ++r) {
    if (r < 0 || r >= rows_) continue;
    const double shift = (r % 2 == 1) ? 0.5 * width_ : 0.0;
    const double c_guess = std::round((q.x - shift) / width_);
    if (c_guess < -4.0 || c_guess > cols_ + 3.0) continue;
    const int c0 = static_cast<int>(c_guess);
    for (int c = c0 - 3; c <= c0 + 3; ++c) {
      const auto v = vertex_at(r, c);
      if (!v) continue;
      const Point2 center = cell_center(r, c);
      const double d2 = (center.x - q.x) * (center.x - q.x) + (center.y - q.y) * (center.y - q.y);
      if (d2 < best_d2 || (d2 == best_d2 && *v < *best)) {
        best_d2 = d2;
        best = v;
      }
    }
  }
  if (!best || best_d2 > 4.0 * width_ * width_) return std::nullopt;
  return best;
}

std::vector<VertexId> bridge_path(const SimplicialComplex& sc, VertexId a, VertexId b) {
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(sc.vertex_count(), kUnseen);
  std::queue<VertexId> frontier;
  dist[b] = 0;
  frontier.push(b);
  while (!frontier.empty() && dist[a] == kUnseen) {
    const VertexId u = frontier.front();
    frontier.pop();
    for (const Neighbor& nb : sc.neighbors(u)) {
      if (dist[nb.vertex] != kUnseen) continue;
      dist[nb.vertex] = dist[u] + 1;
      frontier.push(nb.vertex);
    }
  }
  if (dist[a] == kUnseen)
    throw Error(ErrorKind::NoBridgePath,
                "cells " + std::to_string(a + 1) + " and " + std::to_string(b + 1) + " are not connected");

  // Walking down the distance field from a, always to the lowest-numbered
  // admissible neighbor, gives the lexicographically smallest shortest path.
  std::vector<VertexId> path{a};
  VertexId cur = a;
  while (cur != b) {
    for (const Neighbor& nb : sc.neighbors(cur)) {
      if (dist[nb.vertex] + 1 == dist[cur]) {
        cur = nb.vertex;
        break;
      }
    }
    path.push_back(cur);
  }
  return path;
}

TrajectoryPath discretize_track(const HexGrid& grid, std::span<const TrackPoint> points, const std::string& id) {
  std::vector<VertexId> cells;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto cell = grid.nearest_cell({points[i].lat, points[i].lon});
    if (!cell)
      throw Error(ErrorKind::PointOutsideGrid, "track '" + id + "' point " + std::to_string(i + 1) + " (" +
                                                   format_double(points[i].lat) + ", " +
                                                   format_double(points[i].lon) + ") has no live cell nearby");
    if (cells.empty() || cells.back() != *cell) cells.push_back(*cell);
  }
  if (cells.size() < 2)
    throw Error(ErrorKind::DegenerateTrack, "track '" + id + "' stays within a single cell");

  TrajectoryPath out;
  out.id = id;
  out.vertices.push_back(cells.front());
  const SimplicialComplex& sc = grid.complex();
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (sc.edge_index(cells[i - 1], cells[i])) {
      out.vertices.push_back(cells[i]);
      continue;
    }
    const auto bridge = bridge_path(sc, cells[i - 1], cells[i]);
    out.vertices.insert(out.vertices.end(), bridge.begin() + 1, bridge.end());
  }
  return out;
}

TrackColumns parse_column_mapping(const std::string& text) {
  TrackColumns columns;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::ParseError, "column mapping line " + std::to_string(line_no) + ": expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key == "timestamp") columns.timestamp = value;
    else if (key == "lat") columns.lat = value;
    else if (key == "lon") columns.lon = value;
    else if (key == "individual") columns.individual = value;
    else
      throw Error(ErrorKind::ParseError,
                  "column mapping line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return columns;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  text = trim(text);
  std::size_t pos = 0;
  auto number = [&](std::size_t digits, int& out) {
    if (pos + digits > text.size()) return false;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + digits, out);
    if (ec != std::errc() || ptr != text.data() + pos + digits) return false;
    pos += digits;
    return true;
  };
  auto expect = [&](char c) {
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  };

  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!number(4, year) || !expect('-') || !number(2, month) || !expect('-') || !number(2, day))
    return std::nullopt;
  double fraction = 0.0;
  if (pos < text.size() && (text[pos] == ' ' || text[pos] == 'T')) {
    ++pos;
    if (!number(2, hour) || !expect(':') || !number(2, minute)) return std::nullopt;
    if (expect(':') && !number(2, second)) return std::nullopt;
    if (expect('.')) {
      const std::size_t begin = pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
      if (pos == begin) return std::nullopt;
      double scale = 0.1;
      for (std::size_t i = begin; i < pos; ++i, scale *= 0.1) fraction += (text[i] - '0') * scale;
    }
  }
  expect('Z');
  if (pos != text.size()) return std::nullopt;

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t seconds = static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 + second;
  return seconds * 1000 + static_cast<std::int64_t>(std::llround(fraction * 1000.0));
}

std::vector<Track> tracks_from_csv(const std::string& text, const TrackColumns& columns) {
  const CsvTable table = parse_csv(text);
  const std::size_t c_time = table.column(columns.timestamp);
  const std::size_t c_lat = table.column(columns.lat);
  const std::size_t c_lon = table.column(columns.lon);
  const std::size_t c_id = table.column(columns.individual);
  const std::size_t needed = std::max({c_time, c_lat, c_lon, c_id}) + 1;

  std::vector<Track> tracks;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "line " + std::to_string(table.lines[r]);
    if (row.size() < needed) throw Error(ErrorKind::ParseError, where + ": too few fields");
    const std::string_view lat_text = trim(row[c_lat]);
    const std::string_view lon_text = trim(row[c_lon]);
    if (lat_text.empty() && lon_text.empty()) continue;

    TrackPoint point;
    const auto lat = parse_double(lat_text);
    const auto lon = parse_double(lon_text);
    if (!lat || !lon) throw Error(ErrorKind::ParseError, where + ": malformed coordinates");
    if (!(*lat >= -90.0 && *lat <= 90.0))
      throw Error(ErrorKind::ParseError, where + ": latitude " + std::string(lat_text) + " outside [-90, 90]");
    if (!(*lon >= -180.0 && *lon <= 180.0))
      throw Error(ErrorKind::ParseError, where + ": longitude " + std::string(lon_text) + " outside [-180, 180]");
    const auto stamp = parse_timestamp(row[c_time]);
    if (!stamp) throw Error(ErrorKind::ParseError, where + ": malformed timestamp '" + row[c_time] + "'");
    point.lat = *lat;
    point.lon = *lon;
    point.timestamp_ms = *stamp;
    point.individual_id = std::string(trim(row[c_id]));
    if (point.individual_id.empty()) throw Error(ErrorKind::ParseError, where + ": empty individual id");

    auto [it, inserted] = slot.try_emplace(point.individual_id, tracks.size());
    if (inserted) tracks.push_back({point.individual_id, {}});
    tracks[it->second].points.push_back(std::move(point));
  }
  for (Track& track : tracks)
    std::stable_sort(track.points.begin(), track.points.end(),
                     [](const TrackPoint& a, const TrackPoint& b) { return a.timestamp_ms < b.timestamp_ms; });
  return tracks;
}

std::vector<Track> ingest_tracks_csv(const std::filesystem::path& path, const TrackColumns& columns) {
  return tracks_from_csv(read_text_file(path), columns);
}

std::string centers_to_csv(const HexGrid& grid) {
  std::string out = "vertex,lat,lon\n";
  for (std::size_t v = 0; v < grid.cell_count(); ++v) {
    out += std::to_string(v + 1) + ',' + format_double(grid.centers()[v].lat) + ',' +
           format_double(grid.centers()[v].lon) + '\n';
  }
  return out;
}

}  // namespace flowembed

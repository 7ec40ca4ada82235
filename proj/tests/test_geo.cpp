#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <random>

#include "flowembed/error.hpp"
#include "flowembed/geo.hpp"
#include "flowembed/spectral.hpp"

using namespace flowembed;

namespace {

void check_kind(ErrorKind kind, auto&& fn) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

HexGrid patch3x3() { return HexGrid::build({0.0, 1.75, 0.0, 2.2}, 1.0); }

std::vector<GeoPoint> square_ring(double lat0, double lat1, double lon0, double lon1) {
  return {{lat0, lon0}, {lat0, lon1}, {lat1, lon1}, {lat1, lon0}, {lat0, lon0}};
}

LandMask two_islands() {
  LandMask land;
  land.rings.push_back(square_ring(3, 5, 2, 4));
  land.rings.push_back(square_ring(5, 7, 6, 8));
  return land;
}

TrackPoint fix(std::int64_t t, double lat, double lon) { return {t, lat, lon, "a"}; }

std::int64_t epoch_ms(int y, unsigned m, unsigned d, int hh, int mm, int ss, int ms) {
  using namespace std::chrono;
  const sys_days date{year{y} / month{m} / day{d}};
  return duration_cast<milliseconds>(date.time_since_epoch()).count() +
         ((hh * 60 + mm) * 60 + ss) * 1000LL + ms;
}

}  // namespace

TEST_CASE("3 x 3 patch") {
  const auto grid = patch3x3();
  CHECK(grid.rows() == 3);
  CHECK(grid.cols() == 3);
  const auto& sc = grid.complex();
  CHECK(sc.vertex_count() == 9);
  CHECK(sc.edge_count() == 16);
  CHECK(sc.triangle_count() == 8);
  CHECK(betti_1(sc) == 0);
  // even row (0,1) touches (1,0) and (1,1); odd row (1,1) touches (2,1) and (2,2)
  CHECK(sc.edge_index(1, 3).has_value());
  CHECK(sc.edge_index(1, 4).has_value());
  CHECK(sc.edge_index(4, 7).has_value());
  CHECK(sc.edge_index(4, 8).has_value());
  CHECK_FALSE(sc.edge_index(4, 6).has_value());
  CHECK(*grid.vertex_at(2, 1) == 7);
  CHECK_FALSE(grid.vertex_at(3, 0).has_value());

  // Every edge joins centers exactly one width apart in the chart.
  for (const auto& e : sc.edges()) {
    const auto a = grid.to_plane(grid.centers()[e.tail]);
    const auto b = grid.to_plane(grid.centers()[e.head]);
    CHECK(std::hypot(a.x - b.x, a.y - b.y) == doctest::Approx(1.0));
  }
  for (const auto& c : grid.corners(4)) {
    const auto p = grid.to_plane(c);
    const auto o = grid.to_plane(grid.centers()[4]);
    CHECK(std::hypot(p.x - o.x, p.y - o.y) == doctest::Approx(1.0 / std::sqrt(3.0)));
  }
}

TEST_CASE("degenerate boxes") {
  const auto row = HexGrid::build({0.0, 0.0, 0.0, 4.0}, 1.0);
  CHECK(row.rows() == 1);
  CHECK(row.complex().vertex_count() == 5);
  CHECK(row.complex().edge_count() == 4);
  CHECK(row.complex().triangle_count() == 0);
  CHECK(HexGrid::build({1.0, 1.0, 1.0, 1.0}, 1.0).cell_count() == 1);
  check_kind(ErrorKind::EmptyGrid, [] { HexGrid::build({1.0, 0.0, 0.0, 1.0}, 1.0); });
  check_kind(ErrorKind::EmptyGrid, [] { HexGrid::build({0.0, 1.0, 0.0, 1.0}, 0.0); });
  check_kind(ErrorKind::EmptyGrid, [] { HexGrid::build({0.0, NAN, 0.0, 1.0}, 1.0); });
}

TEST_CASE("islands become holes") {
  const auto grid = HexGrid::build({0, 10, 0, 10}, 0.5);
  CHECK(betti_1(grid.complex()) == 0);
  const auto land = two_islands();
  const auto masked = grid.masked(land);
  CHECK(masked.cell_count() < grid.cell_count());
  CHECK(betti_1(masked.complex()) == 2);
  CHECK(harmonic_basis(hodge_laplacian(masked.complex())).betti() == 2);

  LandMask one;
  one.rings.push_back(square_ring(3, 5, 2, 4));
  CHECK(betti_1(grid.masked(one).complex()) == 1);

  // Removed cells are those fully on land; partial cells survive.
  for (std::size_t v = 0; v < masked.cell_count(); ++v) {
    bool all_land = land.contains(masked.centers()[v]);
    for (const auto& c : masked.corners(static_cast<VertexId>(v))) all_land = all_land && land.contains(c);
    CHECK_FALSE(all_land);
  }

  LandMask everything;
  everything.rings.push_back(square_ring(-20, 20, -20, 20));
  check_kind(ErrorKind::AllCellsRemoved, [&] { grid.masked(everything); });
}

TEST_CASE("land mask even-odd rule") {
  LandMask donut;
  donut.rings.push_back(square_ring(0, 10, 0, 10));
  donut.rings.push_back(square_ring(4, 6, 4, 6));
  CHECK(donut.contains({1, 1}));
  CHECK_FALSE(donut.contains({5, 5}));
  CHECK_FALSE(donut.contains({11, 5}));
}

TEST_CASE("GeoJSON land masks") {
  const std::string polygon =
      R"({"type":"Polygon","coordinates":[[[2,3],[4,3],[4,5],[2,5],[2,3]]]})";
  const auto a = land_mask_from_geojson(polygon);
  REQUIRE(a.rings.size() == 1);
  CHECK(a.contains({4, 3}));  // lat 4, lon 3
  CHECK_FALSE(a.contains({3, 4.5}));

  const std::string collection = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{},"geometry":{"type":"MultiPolygon","coordinates":[
        [[[0,0],[1,0],[1,1],[0,1],[0,0]]],
        [[[5,5],[6,5],[6,6],[5,6],[5,5]]]]}},
      {"type":"Feature","properties":{},"geometry":null}]})";
  const auto b = land_mask_from_geojson(collection);
  CHECK(b.rings.size() == 2);
  CHECK(b.contains({5.5, 5.5}));

  check_kind(ErrorKind::ParseError, [] { land_mask_from_geojson(R"({"type":"Point","coordinates":[0,0]})"); });
  check_kind(ErrorKind::ParseError, [] { land_mask_from_geojson("[1,2"); });
}

TEST_CASE("snapping") {
  const auto grid = HexGrid::build({0, 10, 0, 10}, 0.5).masked(two_islands());
  for (VertexId v = 0; v < grid.cell_count(); v += 13) CHECK(grid.nearest_cell(grid.centers()[v]) == v);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-0.5, 10.5);
  for (int i = 0; i < 300; ++i) {
    const GeoPoint p{u(gen), u(gen)};
    const auto got = grid.nearest_cell(p);
    REQUIRE(got.has_value());
    // brute force over all live cells
    const auto q = grid.to_plane(p);
    VertexId best = 0;
    double best_d = INFINITY;
    for (VertexId v = 0; v < grid.cell_count(); ++v) {
      const auto c = grid.to_plane(grid.centers()[v]);
      const double d = std::hypot(c.x - q.x, c.y - q.y);
      if (d < best_d) {
        best_d = d;
        best = v;
      }
    }
    CHECK(*got == best);
    CHECK(grid.nearest_cell(grid.centers()[*got]) == got);
  }
  CHECK_FALSE(grid.nearest_cell({-5, 5}).has_value());
  CHECK_FALSE(grid.nearest_cell({5, 40}).has_value());
}

TEST_CASE("bridging and discretization") {
  const auto grid = patch3x3();
  const auto& sc = grid.complex();
  CHECK(bridge_path(sc, 1, 7) == std::vector<VertexId>{1, 3, 7});
  CHECK(bridge_path(sc, 0, 6) == std::vector<VertexId>{0, 3, 6});
  CHECK(bridge_path(sc, 2, 2) == std::vector<VertexId>{2});
  const auto split = SimplicialComplex::build(3, std::vector<std::array<VertexId, 2>>{{0, 1}}, {});
  check_kind(ErrorKind::NoBridgePath, [&] { bridge_path(split, 0, 2); });

  const auto row = HexGrid::build({0.0, 0.0, 0.0, 4.0}, 1.0);
  const std::vector<TrackPoint> jump{fix(0, 0, 0.05), fix(1, 0.01, 0.1), fix(2, 0, 3.0)};
  const auto path = discretize_track(row, jump, "w");
  CHECK(path.id == "w");
  CHECK(path.vertices == std::vector<VertexId>{0, 1, 2, 3});

  check_kind(ErrorKind::DegenerateTrack, [&] { discretize_track(row, std::vector<TrackPoint>{fix(0, 0, 0), fix(1, 0, 0.1)}); });
  check_kind(ErrorKind::PointOutsideGrid, [&] { discretize_track(row, std::vector<TrackPoint>{fix(0, 0, 0), fix(1, 9, 0)}); });
}

TEST_CASE("timestamps") {
  CHECK(parse_timestamp("1970-01-01T00:00:01Z") == 1000);
  CHECK(parse_timestamp("2020-02-29 12:34:56.789") == epoch_ms(2020, 2, 29, 12, 34, 56, 789));
  CHECK(parse_timestamp("1999-12-31 23:59") == epoch_ms(1999, 12, 31, 23, 59, 0, 0));
  CHECK(parse_timestamp("2010-06-15") == epoch_ms(2010, 6, 15, 0, 0, 0, 0));
  CHECK(parse_timestamp("1969-12-31T23:59:59.5") == -500);
  CHECK_FALSE(parse_timestamp("2021-02-30 00:00").has_value());
  CHECK_FALSE(parse_timestamp("yesterday").has_value());
  CHECK_FALSE(parse_timestamp("2020-01-01 25:00").has_value());
}

TEST_CASE("track CSV ingestion") {
  const std::string csv =
      "event-id,timestamp,location-long,location-lat,individual-local-identifier\n"
      "1,2020-01-01 00:10:00,10.5,-3.25,whale B\n"
      "2,2020-01-01 00:00:00,11.0,-3.5,whale B\n"
      "3,2020-01-01 00:05:00,1.0,2.0,whale A\n"
      "4,2020-01-01 00:06:00,,,whale A\n";
  const auto tracks = tracks_from_csv(csv);
  REQUIRE(tracks.size() == 2);
  CHECK(tracks[0].individual_id == "whale B");
  REQUIRE(tracks[0].points.size() == 2);
  CHECK(tracks[0].points[0].lon == 11.0);
  CHECK(tracks[0].points[1].lat == -3.25);
  CHECK(tracks[1].points.size() == 1);

  try {
    tracks_from_csv("timestamp,location-long,location-lat,individual-local-identifier\n"
                    "2020-01-01 00:00:00,1,2,a\n"
                    "2020-01-01 00:01:00,1,95,a\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  check_kind(ErrorKind::MissingColumn, [] { tracks_from_csv("timestamp,lat,lon,id\n"); });
  check_kind(ErrorKind::ParseError, [] {
    tracks_from_csv("timestamp,location-long,location-lat,individual-local-identifier\nnever,1,2,a\n");
  });

  const auto mapping = parse_column_mapping("# custom names\ntimestamp = time\nlat=y\nlon=x\nindividual=animal\n");
  CHECK(mapping.lat == "y");
  CHECK(mapping.individual == "animal");
  const auto renamed = tracks_from_csv("time,x,y,animal\n2020-01-01,5,6,z\n", mapping);
  REQUIRE(renamed.size() == 1);
  CHECK(renamed[0].points[0].lat == 6.0);
  check_kind(ErrorKind::ParseError, [] { parse_column_mapping("speed=v\n"); });
}

TEST_CASE("centers CSV") {
  const auto text = centers_to_csv(patch3x3());
  CHECK(text.rfind("vertex,lat,lon\n1,0,0\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 10);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "flowembed/csv.hpp"
#include "flowembed/error.hpp"
#include "flowembed/pipeline.hpp"

using namespace flowembed;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("flowembed_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void check_kind(ErrorKind kind, auto&& fn) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

ExperimentConfig small_experiment() {
  ExperimentConfig config;
  config.dataset_count = 3;
  config.master_seed = 11;
  return config;
}

}  // namespace

TEST_CASE("file chain reproduces the experiment runner") {
  const auto config = small_experiment();
  const auto report = run_experiment(config);
  REQUIRE(report.datasets.size() == 3);

  const auto dir = fresh_dir("chain");
  SyntheticConfig synth = config.synthetic;
  synth.seed = derive_seed(config.master_seed, 1);
  CHECK(report.datasets[1].seed == synth.seed);
  const auto files = cmd_synth_generate(synth, dir);
  CHECK(files.trajectory_count == 125);

  EmbedOptions eo;
  eo.complex_file = files.complex;
  eo.trajectories_file = files.trajectories;
  eo.labels_file = files.labels;
  eo.out_file = dir / "embeddings.csv";
  eo.basis_file = dir / "basis.csv";
  const auto embedded = cmd_embed(eo);
  CHECK(embedded.betti == 2);
  CHECK(embedded.warnings.empty());
  CHECK(read_text_file(dir / "basis.csv").rfind("edge,tail,head,h_0,h_1\n", 0) == 0);

  const auto labels = labels_from_csv(read_text_file(files.labels));
  std::vector<bool> truth;
  for (const auto& l : labels) truth.push_back(l.outlier);

  for (auto det : {Detector::IsolationForest, Detector::LocalOutlierFactor}) {
    DetectOptions d;
    d.embedding_file = eo.out_file;
    d.out_file = dir / "scores.csv";
    d.detector = det;
    d.params = config.detector;
    const auto detected = cmd_detect(d);
    const auto m = evaluate_detection(detected.report.flagged, truth);
    const auto& expected = det == Detector::IsolationForest ? report.datasets[1].iforest : report.datasets[1].lof;
    CHECK(m.accuracy == expected.accuracy);
    CHECK(m.true_positives == expected.true_positives);
  }
  fs::remove_all(dir);
}

TEST_CASE("experiment output does not depend on parallelism") {
  auto config = small_experiment();
  const auto serial = experiment_report_json(run_experiment(config));
  config.parallelism = 3;
  const auto parallel = run_experiment(config);
  CHECK(experiment_report_json(parallel) == serial);
  CHECK(serial.find("\"seconds\"") == std::string::npos);
  CHECK(experiment_timings_json(parallel).find("\"seconds\"") != std::string::npos);
  CHECK(parallel.lof.min_accuracy <= parallel.lof.mean_accuracy);
  CHECK(parallel.lof.mean_accuracy <= parallel.lof.max_accuracy);
  CHECK(!experiment_table(parallel).empty());

  const auto dir = fresh_dir("report");
  write_experiment_report(parallel, dir);
  CHECK(read_text_file(dir / "report.json") == serial);
  CHECK(fs::exists(dir / "timings.json"));
  fs::remove_all(dir);
}

TEST_CASE("experiment errors name the dataset") {
  auto config = small_experiment();
  config.synthetic.holes = {{{0.45, 0.5}, 0.12}, {{0.55, 0.5}, 0.12}};
  try {
    run_experiment(config);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HoleCountMismatch);
    CHECK(std::string(e.what()).find("dataset 0") != std::string::npos);
  }
}

TEST_CASE("embedding labels must match trajectory ids") {
  const auto sc = SimplicialComplex::build(3, std::vector<std::array<VertexId, 2>>{{0, 1}, {1, 2}, {0, 2}}, {});
  const auto basis = harmonic_basis(hodge_laplacian(sc));
  const std::vector<TrajectoryPath> trajs{{"a", {0, 1, 2, 0}}, {"b", {0, 1}}};
  const std::vector<LabelRow> good{{"b", 1, false}, {"a", kOutlierLabel, true}};
  const auto table = embed_trajectories(sc, basis, trajs, good);
  CHECK(table.labels == std::vector<std::string>{"outlier", "1"});
  CHECK(std::abs(table.points(0, 0)) == doctest::Approx(std::sqrt(3.0)));

  const std::vector<LabelRow> bad{{"a", 0, false}, {"c", 0, false}};
  try {
    embed_trajectories(sc, basis, trajs, bad);
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
    CHECK(std::string(e.what()).find("c") != std::string::npos);
  }
}

TEST_CASE("embed warns on a complex without holes") {
  const auto dir = fresh_dir("noholes");
  const auto sc = SimplicialComplex::build(3, std::vector<std::array<VertexId, 2>>{{0, 1}, {1, 2}, {0, 2}},
                                           std::vector<std::array<VertexId, 3>>{{0, 1, 2}});
  write_complex_file(sc, dir / "c.json");
  write_trajectories_file(std::vector<TrajectoryPath>{{"x", {0, 1, 2}}}, dir / "t.csv");
  EmbedOptions eo;
  eo.complex_file = dir / "c.json";
  eo.trajectories_file = dir / "t.csv";
  eo.out_file = dir / "e.csv";
  const auto r = cmd_embed(eo);
  CHECK(r.betti == 0);
  CHECK(r.warnings.size() == 1);
  CHECK(read_text_file(eo.out_file) == "trajectory_id\nx\n");
  fs::remove_all(dir);
}

TEST_CASE("plot inputs") {
  const auto dir = fresh_dir("plot");
  SyntheticConfig synth;
  synth.point_count = 400;
  synth.seed = 2;
  const auto files = cmd_synth_generate(synth, dir);
  EmbedOptions eo;
  eo.complex_file = files.complex;
  eo.trajectories_file = files.trajectories;
  eo.labels_file = files.labels;
  eo.out_file = dir / "emb.csv";
  cmd_embed(eo);
  DetectOptions d;
  d.embedding_file = eo.out_file;
  d.out_file = dir / "scores.csv";
  d.grid_file = dir / "grid.csv";
  d.grid_resolution = 20;
  cmd_detect(d);

  PlotInputs in;
  in.complex_file = files.complex;
  in.coords_file = files.coords;
  in.trajectories_file = files.trajectories;
  in.labels_file = files.labels;
  in.embedding_file = eo.out_file;
  in.scores_file = d.out_file;
  in.grid_file = d.grid_file;
  in.polylines = true;
  const auto out = cmd_plot(in, dir / "svg");
  CHECK(out.size() == 3);
  for (const auto& p : out) CHECK(read_text_file(p).rfind("<svg", 0) == 0);

  check_kind(ErrorKind::InvalidArgument, [&] { cmd_plot(PlotInputs{}, dir / "none"); });

  // drop one trajectory from the scores: ids no longer line up
  auto text = read_text_file(d.out_file);
  text.erase(text.rfind('\n', text.size() - 2) + 1);
  write_text_file(dir / "short.csv", text);
  PlotInputs mismatched;
  mismatched.embedding_file = eo.out_file;
  mismatched.scores_file = dir / "short.csv";
  check_kind(ErrorKind::ValidationError, [&] { cmd_plot(mismatched, dir / "bad"); });
  fs::remove_all(dir);
}

TEST_CASE("geo pipeline on a small sea") {
  const GeoBox box{0, 6, 0, 6};
  LandMask land;
  land.rings.push_back({{2, 2}, {2, 4}, {4, 4}, {4, 2}, {2, 2}});
  std::vector<Track> tracks;
  auto add = [&](const std::string& id, std::vector<GeoPoint> pts) {
    Track t{id, {}};
    for (std::size_t i = 0; i < pts.size(); ++i) t.points.push_back({static_cast<std::int64_t>(i), pts[i].lat, pts[i].lon, id});
    tracks.push_back(t);
  };
  add("loop", {{1, 1}, {1, 5}, {5, 5}, {5, 1}, {1, 1}});
  add("short", {{1, 1}, {1, 2}});
  add("still", {{5, 5}, {5.01, 5.01}});
  GeoOptions options;
  options.bbox = box;
  options.cell_width_deg = 0.4;
  const auto r = run_geo_pipeline(tracks, land, options);
  CHECK(r.betti == 1);
  CHECK(r.skipped == std::vector<std::string>{"still"});
  REQUIRE(r.trajectories.size() == 2);
  CHECK(r.trajectories[0].vertices.front() == r.trajectories[0].vertices.back());
  CHECK(std::abs(r.embeddings.points(0, 0)) > 1.0);
  CHECK(r.lof.scores.size() == 2);
}

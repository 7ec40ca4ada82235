#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "flowembed/error.hpp"
#include "flowembed/outlier.hpp"
#include "oracles.hpp"

using namespace flowembed;

namespace {

PointCloud cloud(std::initializer_list<std::initializer_list<double>> rows) {
  PointCloud m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

PointCloud gaussian_blob(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  PointCloud m(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(gen);
  return m;
}

void check_kind(ErrorKind kind, auto&& fn) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

// Independent harmonic-number form of c(n).
double c_of(std::size_t n) {
  if (n <= 1) return 0;
  double h = 0;
  for (std::size_t i = 1; i < n; ++i) h += 1.0 / static_cast<double>(i);
  return 2.0 * h - 2.0 * static_cast<double>(n - 1) / static_cast<double>(n);
}

// Isolation depth of x among the 1-D values by direct random partitioning.
double isolation_depth(std::vector<double> s, double x, std::size_t limit, std::mt19937_64& gen) {
  std::size_t depth = 0;
  while (s.size() > 1 && depth < limit) {
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    if (*lo == *hi) break;
    const double split = std::uniform_real_distribution<double>(*lo, *hi)(gen);
    std::vector<double> side;
    for (double v : s)
      if ((v < split) == (x < split)) side.push_back(v);
    s.swap(side);
    ++depth;
  }
  const std::size_t m = s.size();
  if (m <= 1) return static_cast<double>(depth);
  if (m == 2) return static_cast<double>(depth) + 1.0;
  const double md = static_cast<double>(m);
  return static_cast<double>(depth) + 2.0 * (std::log(md - 1.0) + std::numbers::egamma) - 2.0 * (md - 1.0) / md;
}

}  // namespace

TEST_CASE("LOF on symmetric configurations") {
  PointCloud octagon(8, 2);
  for (int i = 0; i < 8; ++i) {
    const double a = i * std::numbers::pi / 4;
    octagon.row(i) << std::cos(a), std::sin(a);
  }
  const auto s = lof_scores(octagon, 3);
  for (double v : s) CHECK(v == doctest::Approx(s[0]).epsilon(1e-12));

  const auto square = cloud({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {10, 10}});
  const auto sq = lof_scores(square, 2);
  for (int i = 0; i < 4; ++i) CHECK(sq[4] > sq[i]);
  CHECK(sq[4] > 2.0);
}

TEST_CASE("LOF on three collinear points, k = 2") {
  const auto line = cloud({{0}, {1}, {2}});
  const auto s = lof_scores(line, 2);
  // hand derivation: lrd = 2/3, 1/2, 2/3
  CHECK(s[0] == doctest::Approx(0.875));
  CHECK(s[1] == doctest::Approx(4.0 / 3.0));
  CHECK(s[2] == doctest::Approx(0.875));
  const auto one = lof_scores(line, 1);
  for (double v : one) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("LOF agrees with the brute-force oracle") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 10 + gen() % 60;
    const std::size_t k = 1 + gen() % 8;
    PointCloud pts = gaussian_blob(n, gen());
    // include exact duplicates to exercise the lrd floor and tie rules
    pts.row(1) = pts.row(0);
    const auto got = lof_scores(pts, k);
    const auto want = oracle::lof(pts, k);
    for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
  }
}

TEST_CASE("LOF invariance under rigid motion and uniform scaling") {
  const PointCloud pts = gaussian_blob(50, 8);
  const auto base = lof_scores(pts, 5);
  Eigen::Matrix2d rot;
  rot << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
  PointCloud moved = (pts * rot.transpose() * 3.5).rowwise() + Eigen::RowVector2d(4, -2);
  const auto after = lof_scores(moved, 5);
  for (std::size_t i = 0; i < 50; ++i) CHECK(after[i] == doctest::Approx(base[i]).epsilon(1e-9));
}

TEST_CASE("LOF coincident points stay finite") {
  const auto same = cloud({{1, 1}, {1, 1}, {1, 1}, {1, 1}});
  for (double v : lof_scores(same, 2)) {
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(1.0));
  }
}

TEST_CASE("LOF model scores queries") {
  const PointCloud pts = gaussian_blob(60, 2);
  const LofModel model(pts, 6);
  CHECK(model.training_scores() == lof_scores(pts, 6));
  Eigen::VectorXd far(2);
  far << 25, 25;
  const double outside = model.score(far);
  CHECK(outside > *std::max_element(model.training_scores().begin(), model.training_scores().end()));
  check_kind(ErrorKind::InvalidArgument, [&] { lof_scores(pts, 60); });
  check_kind(ErrorKind::InvalidArgument, [&] { lof_scores(pts, 0); });
}

TEST_CASE("average path length") {
  CHECK(average_path_length(0) == 0.0);
  CHECK(average_path_length(1) == 0.0);
  CHECK(average_path_length(2) == 1.0);
  // log approximation of the harmonic number
  for (std::size_t n : {64u, 256u, 4096u}) CHECK(average_path_length(n) == doctest::Approx(c_of(n)).epsilon(0.01));
}

TEST_CASE("isolation forest on identical points scores one half") {
  const auto same = cloud({{3, 3}, {3, 3}, {3, 3}, {3, 3}, {3, 3}});
  const auto model = IsolationForestModel::fit(same, 10, 5, 1);
  for (double s : model.scores(same)) CHECK(s == doctest::Approx(0.5));
  const auto pair = cloud({{0, 0}, {1, 1}});
  // psi = 2: every point is isolated at depth 1 and c(2) = 1
  for (double s : IsolationForestModel::fit(pair, 20, 2, 3).scores(pair)) CHECK(s == doctest::Approx(0.5));
}

TEST_CASE("isolation forest matches direct Monte-Carlo isolation in 1-D") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> g;
  std::vector<double> values(64);
  for (auto& v : values) v = g(gen);
  values[0] = 6.0;
  PointCloud pts(64, 1);
  for (int i = 0; i < 64; ++i) pts(i, 0) = values[static_cast<std::size_t>(i)];

  const auto model = IsolationForestModel::fit(pts, 4000, 64, 5);
  CHECK(model.max_depth() == 6);
  const auto scores = model.scores(pts);
  const double c64 = average_path_length(64);
  for (std::size_t probe : {0u, 1u, 7u, 33u}) {
    double total = 0;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) total += isolation_depth(values, values[probe], 6, gen);
    const double expected = std::pow(2.0, -(total / trials) / c64);
    CHECK(scores[probe] == doctest::Approx(expected).epsilon(0.02));
  }
  CHECK(scores[0] == *std::max_element(scores.begin(), scores.end()));
}

TEST_CASE("isolation forest determinism and parameters") {
  const PointCloud pts = gaussian_blob(300, 5);
  const auto a = IsolationForestModel::fit(pts, 50, 256, 9);
  const auto b = IsolationForestModel::fit(pts, 50, 256, 9);
  const auto c = IsolationForestModel::fit(pts, 50, 256, 10);
  CHECK(a.scores(pts) == b.scores(pts));
  CHECK(a.scores(pts) != c.scores(pts));
  CHECK(a.tree_count() == 50);
  CHECK(a.subsample_size() == 256);
  CHECK(a.max_depth() == 8);
  for (double s : a.scores(pts)) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
  check_kind(ErrorKind::InvalidArgument, [&] { IsolationForestModel::fit(pts, 0, 256, 1); });
  check_kind(ErrorKind::InvalidArgument, [&] { IsolationForestModel::fit(pts, 10, 1, 1); });
  check_kind(ErrorKind::InvalidArgument, [&] { IsolationForestModel::fit(pts.topRows(1), 10, 2, 1); });
}

TEST_CASE("contamination thresholding") {
  const std::vector<double> scores{0.1, 0.9, 0.9, 0.5};
  CHECK(threshold_by_contamination(scores, 0.49) == std::vector<bool>{false, true, false, false});
  CHECK(threshold_by_contamination(scores, 0.2) == std::vector<bool>(4, false));
  std::vector<double> ten(10);
  for (int i = 0; i < 10; ++i) ten[static_cast<std::size_t>(i)] = i % 5;
  const auto flags = threshold_by_contamination(ten, 0.3);
  CHECK(std::count(flags.begin(), flags.end(), true) == 3);
  CHECK(flags[4]);
  CHECK(flags[9]);
  CHECK(flags[3]);
  CHECK_FALSE(flags[8]);
  check_kind(ErrorKind::InvalidArgument, [&] { threshold_by_contamination(scores, 0.5); });
  check_kind(ErrorKind::InvalidArgument, [&] { threshold_by_contamination(scores, 0.0); });
}

TEST_CASE("detection metrics") {
  const std::vector<bool> flags{true, true, false, false, false};
  const std::vector<bool> truth{true, false, true, false, false};
  const auto m = evaluate_detection(flags, truth);
  CHECK(m.true_positives == 1);
  CHECK(m.false_positives == 1);
  CHECK(m.false_negatives == 1);
  CHECK(m.true_negatives == 2);
  CHECK(m.accuracy == doctest::Approx(0.6));
  CHECK(m.precision == doctest::Approx(0.5));
  CHECK(m.recall == doctest::Approx(0.5));
  const auto none = evaluate_detection(std::vector<bool>(3, false), std::vector<bool>(3, false));
  CHECK(none.accuracy == 1.0);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  check_kind(ErrorKind::LengthMismatch, [&] { evaluate_detection(flags, {true}); });
}

TEST_CASE("detect caps parameters and flags the far point") {
  PointCloud pts = gaussian_blob(30, 12);
  pts.row(17) << 40, -40;
  DetectorParams params;
  params.contamination = 0.04;  // floor(1.2) = 1
  for (auto det : {Detector::LocalOutlierFactor, Detector::IsolationForest}) {
    const auto report = detect(pts, det, params);
    CHECK(report.params.lof_k == 20);
    REQUIRE(report.flagged.size() == 30);
    CHECK(std::count(report.flagged.begin(), report.flagged.end(), true) == 1);
    CHECK(report.flagged[17]);
  }
  const auto small = detect(pts.topRows(5), Detector::LocalOutlierFactor, params);
  CHECK(small.params.lof_k == 4);
  CHECK(parse_detector("lof") == Detector::LocalOutlierFactor);
  CHECK(parse_detector("if") == Detector::IsolationForest);
  CHECK(parse_detector(to_string(Detector::IsolationForest)) == Detector::IsolationForest);
  check_kind(ErrorKind::InvalidArgument, [] { parse_detector("svm"); });
}

TEST_CASE("score report and grid CSV") {
  const PointCloud pts = gaussian_blob(12, 1);
  const auto report = detect(pts, Detector::IsolationForest, DetectorParams{});
  std::vector<std::string> ids;
  for (int i = 0; i < 12; ++i) ids.push_back("t" + std::to_string(i));
  const auto text = score_report_to_csv(ids, report);
  CHECK(text.rfind("trajectory_id,detector,score,flagged\n", 0) == 0);
  const auto rows = score_report_from_csv(text);
  REQUIRE(rows.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(rows[i].id == ids[i]);
    CHECK(rows[i].score == report.scores[i]);
    CHECK(rows[i].flagged == report.flagged[i]);
  }
  check_kind(ErrorKind::LengthMismatch, [&] { score_report_to_csv(std::vector<std::string>{"a"}, report); });

  const auto grid = decision_grid(pts, Detector::LocalOutlierFactor, DetectorParams{}, 7);
  REQUIRE(grid.size() == 49);
  const double span = pts.col(0).maxCoeff() - pts.col(0).minCoeff();
  CHECK(grid.front().x == doctest::Approx(pts.col(0).minCoeff() - 0.1 * span));
  CHECK(grid.back().x == doctest::Approx(pts.col(0).maxCoeff() + 0.1 * span));
  const auto back = decision_grid_from_csv(decision_grid_to_csv(grid));
  REQUIRE(back.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(back[i].score == grid[i].score);
  check_kind(ErrorKind::InvalidArgument,
             [&] { decision_grid(PointCloud::Zero(4, 3), Detector::IsolationForest, DetectorParams{}, 5); });
}

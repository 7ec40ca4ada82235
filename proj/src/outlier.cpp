#include "flowembed/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowembed/csv.hpp"
#include "flowembed/error.hpp"
#include "flowembed/rng.hpp"

namespace flowembed {

std::string_view to_string(Detector detector) {
  return detector == Detector::LocalOutlierFactor ? "lof" : "iforest";
}

Detector parse_detector(std::string_view name) {
  if (name == "lof" || name == "LOF" || name == "local-outlier-factor") return Detector::LocalOutlierFactor;
  if (name == "if" || name == "IF" || name == "iforest" || name == "isolation-forest") {
    return Detector::IsolationForest;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown detector '" + std::string(name) + "'");
}

namespace {

constexpr double kReachFloor = 1e-12;

void require_finite(const PointCloud& points) {
  if (!points.allFinite()) throw Error(ErrorKind::InvalidArgument, "point cloud has non-finite entries");
}

// k nearest of `query` among rows of `points` (skipping `self`), ascending by
// (distance, index).
std::vector<std::pair<double, std::size_t>> nearest(const PointCloud& points, const Eigen::VectorXd& query,
                                                    std::size_t k, std::ptrdiff_t self) {
  std::vector<std::pair<double, std::size_t>> all;
  all.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    if (j == self) continue;
    all.emplace_back((points.row(j).transpose() - query).norm(), static_cast<std::size_t>(j));
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  all.resize(k);
  return all;
}

}  // namespace

LofModel::LofModel(const PointCloud& points, std::size_t k) : points_(points), k_(k) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0 || n <= k) {
    throw Error(ErrorKind::InvalidArgument,
                "LOF needs n > k >= 1 (n = " + std::to_string(n) + ", k = " + std::to_string(k) + ")");
  }
  require_finite(points);
  std::vector<std::vector<std::pair<double, std::size_t>>> neighbors(n);
  k_distance_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i] = nearest(points, points.row(static_cast<Eigen::Index>(i)).transpose(), k,
                           static_cast<std::ptrdiff_t>(i));
    k_distance_[i] = neighbors[i].back().first;
  }
  lrd_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double reach = 0.0;
    for (const auto& [d, j] : neighbors[i]) reach += std::max(k_distance_[j], d);
    lrd_[i] = 1.0 / std::max(reach / static_cast<double>(k), kReachFloor);
  }
  scores_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto& [d, j] : neighbors[i]) sum += lrd_[j];
    scores_[i] = sum / static_cast<double>(k) / lrd_[i];
  }
}

double LofModel::score(const Eigen::VectorXd& query) const {
  const auto nb = nearest(points_, query, k_, -1);
  double reach = 0.0;
  double sum = 0.0;
  for (const auto& [d, j] : nb) {
    reach += std::max(k_distance_[j], d);
    sum += lrd_[j];
  }
  const double lrd = 1.0 / std::max(reach / static_cast<double>(k_), kReachFloor);
  return sum / static_cast<double>(k_) / lrd;
}

std::vector<double> lof_scores(const PointCloud& points, std::size_t k) {
  return LofModel(points, k).training_scores();
}

double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  constexpr double kEulerGamma = 0.5772156649015329;
  const double m = static_cast<double>(n);
  return 2.0 * (std::log(m - 1.0) + kEulerGamma) - 2.0 * (m - 1.0) / m;
}

IsolationForestModel IsolationForestModel::fit(const PointCloud& points, std::size_t tree_count,
                                               std::size_t subsample_size, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "isolation forest needs at least 2 points");
  if (tree_count == 0) throw Error(ErrorKind::InvalidArgument, "tree_count must be positive");
  if (subsample_size < 2 || subsample_size > n) {
    throw Error(ErrorKind::InvalidArgument, "subsample_size must lie in [2, n]");
  }
  require_finite(points);

  IsolationForestModel model;
  model.subsample_ = subsample_size;
  model.seed_ = seed;
  model.max_depth_ = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(subsample_size))));
  model.trees_.reserve(tree_count);
  const auto dims = static_cast<std::size_t>(points.cols());

  std::vector<std::size_t> pool(n);
  for (std::size_t t = 0; t < tree_count; ++t) {
    Rng rng(derive_seed(seed, t));
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < subsample_size; ++i) {
      std::swap(pool[i], pool[i + rng.index(n - i)]);
    }
    std::vector<std::size_t> members(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(subsample_size));

    Tree tree;
    struct Pending {
      std::size_t node;
      std::size_t begin;
      std::size_t end;
      std::size_t depth;
    };
    tree.push_back({});
    std::vector<Pending> stack{{0, 0, members.size(), 0}};
    std::vector<std::size_t> candidates;
    while (!stack.empty()) {
      const Pending job = stack.back();
      stack.pop_back();
      const std::size_t size = job.end - job.begin;
      tree[job.node].size = size;
      if (job.depth >= model.max_depth_ || size <= 1) continue;

      candidates.clear();
      std::vector<std::pair<double, double>> range(dims);
      for (std::size_t d = 0; d < dims; ++d) {
        double lo = points(static_cast<Eigen::Index>(members[job.begin]), static_cast<Eigen::Index>(d));
        double hi = lo;
        for (std::size_t i = job.begin; i < job.end; ++i) {
          const double v = points(static_cast<Eigen::Index>(members[i]), static_cast<Eigen::Index>(d));
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        range[d] = {lo, hi};
        if (hi > lo) candidates.push_back(d);
      }
      if (candidates.empty()) continue;  // all points identical

      const std::size_t feature = candidates[rng.index(candidates.size())];
      const auto [lo, hi] = range[feature];
      double u = rng.uniform();
      while (u == 0.0) u = rng.uniform();
      double split = lo + (hi - lo) * u;
      if (!(split > lo)) split = std::nextafter(lo, hi);

      const auto col = static_cast<Eigen::Index>(feature);
      auto middle = std::partition(
          members.begin() + static_cast<std::ptrdiff_t>(job.begin),
          members.begin() + static_cast<std::ptrdiff_t>(job.end),
          [&](std::size_t i) { return points(static_cast<Eigen::Index>(i), col) < split; });
      const auto mid = static_cast<std::size_t>(middle - members.begin());

      const std::size_t left = tree.size();
      tree.push_back({});
      const std::size_t right = tree.size();
      tree.push_back({});
      tree[job.node].feature = static_cast<int>(feature);
      tree[job.node].split = split;
      tree[job.node].left = left;
      tree[job.node].right = right;
      stack.push_back({right, mid, job.end, job.depth + 1});
      stack.push_back({left, job.begin, mid, job.depth + 1});
    }
    model.trees_.push_back(std::move(tree));
  }
  return model;
}

double IsolationForestModel::path_length(const Tree& tree, const Eigen::VectorXd& point) const {
  std::size_t node = 0;
  double depth = 0.0;
  while (tree[node].feature >= 0) {
    node = point[tree[node].feature] < tree[node].split ? tree[node].left : tree[node].right;
    depth += 1.0;
  }
  return depth + average_path_length(tree[node].size);
}

double IsolationForestModel::score(const Eigen::VectorXd& point) const {
  double total = 0.0;
  for (const auto& tree : trees_) total += path_length(tree, point);
  const double mean = total / static_cast<double>(trees_.size());
  return std::exp2(-mean / average_path_length(subsample_));
}

std::vector<double> IsolationForestModel::scores(const PointCloud& points) const {
  std::vector<double> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = score(points.row(i).transpose());
  }
  return out;
}

std::vector<bool> threshold_by_contamination(std::span<const double> scores, double contamination) {
  if (!(contamination > 0.0 && contamination < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "contamination must lie in (0, 0.5)");
  }
  const std::size_t n = scores.size();
  const auto count = static_cast<std::size_t>(std::floor(contamination * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<bool> flags(n, false);
  for (std::size_t i = 0; i < count; ++i) flags[order[i]] = true;
  return flags;
}

DetectionMetrics evaluate_detection(const std::vector<bool>& flags, const std::vector<bool>& truth) {
  if (flags.size() != truth.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(flags.size()) + " flags vs " +
                                               std::to_string(truth.size()) + " labels");
  }
  DetectionMetrics m;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] && truth[i]) ++m.true_positives;
    else if (flags[i]) ++m.false_positives;
    else if (truth[i]) ++m.false_negatives;
    else ++m.true_negatives;
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(m.true_positives + m.true_negatives, flags.size());
  m.precision = ratio(m.true_positives, m.true_positives + m.false_positives);
  m.recall = ratio(m.true_positives, m.true_positives + m.false_negatives);
  return m;
}

ScoreReport detect(const PointCloud& points, Detector detector, const DetectorParams& params) {
  ScoreReport report;
  report.detector = detector;
  report.params = params;
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "detection needs at least 2 points");
  if (detector == Detector::LocalOutlierFactor) {
    report.params.lof_k = std::min(params.lof_k, n - 1);
    report.scores = lof_scores(points, report.params.lof_k);
  } else {
    report.params.subsample_size = std::min(params.subsample_size, n);
    report.scores = IsolationForestModel::fit(points, params.tree_count, report.params.subsample_size,
                                              params.seed)
                        .scores(points);
  }
  report.flagged = threshold_by_contamination(report.scores, params.contamination);
  return report;
}

std::string score_report_to_csv(std::span<const std::string> ids, const ScoreReport& report) {
  if (ids.size() != report.scores.size()) {
    throw Error(ErrorKind::LengthMismatch, "one id per score required");
  }
  std::string out = "trajectory_id,detector,score,flagged\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out += csv_escape(ids[i]) + ',' + std::string(to_string(report.detector)) + ',' +
           format_double(report.scores[i]) + ',' + (report.flagged[i] ? "1" : "0") + '\n';
  }
  return out;
}

std::vector<ScoreRow> score_report_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  const std::size_t id_col = table.column("trajectory_id");
  const std::size_t det_col = table.column("detector");
  const std::size_t score_col = table.column("score");
  const std::size_t flag_col = table.column("flagged");
  std::vector<ScoreRow> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = std::to_string(table.lines[r]);
    if (row.size() != table.header.size()) throw Error(ErrorKind::ParseError, "line " + line + ": field count");
    const auto score = parse_double(row[score_col]);
    const auto flag = parse_integer(row[flag_col]);
    if (!score || !flag) throw Error(ErrorKind::ParseError, "line " + line + ": bad score or flag");
    out.push_back({row[id_col], row[det_col], *score, *flag != 0});
  }
  return out;
}

std::vector<GridSample> decision_grid(const PointCloud& points, Detector detector,
                                      const DetectorParams& params, std::size_t resolution) {
  if (points.cols() != 2) {
    throw Error(ErrorKind::InvalidArgument, "decision grids need a 2-D embedding, got " +
                                                std::to_string(points.cols()) + " dimensions");
  }
  if (resolution < 2) throw Error(ErrorKind::InvalidArgument, "grid resolution must be at least 2");
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "decision grids need at least 2 points");
  const Eigen::Vector2d lo = points.colwise().minCoeff();
  const Eigen::Vector2d hi = points.colwise().maxCoeff();
  Eigen::Vector2d pad = 0.1 * (hi - lo);
  for (int d = 0; d < 2; ++d) {
    if (pad[d] <= 0.0) pad[d] = 0.5;
  }
  const Eigen::Vector2d start = lo - pad;
  const Eigen::Vector2d step = (hi + pad - start) / static_cast<double>(resolution - 1);

  std::vector<GridSample> grid;
  grid.reserve(resolution * resolution);
  auto emit = [&](auto&& scorer) {
    for (std::size_t iy = 0; iy < resolution; ++iy) {
      for (std::size_t ix = 0; ix < resolution; ++ix) {
        Eigen::VectorXd q(2);
        q << start.x() + step.x() * static_cast<double>(ix), start.y() + step.y() * static_cast<double>(iy);
        grid.push_back({q[0], q[1], scorer(q)});
      }
    }
  };
  if (detector == Detector::LocalOutlierFactor) {
    const LofModel model(points, std::min(params.lof_k, n - 1));
    emit([&](const Eigen::VectorXd& q) { return model.score(q); });
  } else {
    const auto model = IsolationForestModel::fit(points, params.tree_count,
                                                 std::min(params.subsample_size, n), params.seed);
    emit([&](const Eigen::VectorXd& q) { return model.score(q); });
  }
  return grid;
}

std::string decision_grid_to_csv(std::span<const GridSample> grid) {
  std::string out = "x,y,score\n";
  for (const auto& g : grid) {
    out += format_double(g.x) + ',' + format_double(g.y) + ',' + format_double(g.score) + '\n';
  }
  return out;
}

std::vector<GridSample> decision_grid_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  const std::size_t x_col = table.column("x");
  const std::size_t y_col = table.column("y");
  const std::size_t s_col = table.column("score");
  std::vector<GridSample> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size()) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(table.lines[r]) + ": field count");
    }
    const auto x = parse_double(row[x_col]);
    const auto y = parse_double(row[y_col]);
    const auto s = parse_double(row[s_col]);
    if (!x || !y || !s) throw Error(ErrorKind::ParseError, "line " + std::to_string(table.lines[r]) + ": bad value");
    out.push_back({*x, *y, *s});
  }
  return out;
}

}  // namespace flowembed

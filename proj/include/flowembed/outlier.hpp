#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace flowembed {

/// One point per row.
using PointCloud = Eigen::MatrixXd;

enum class Detector { LocalOutlierFactor, IsolationForest };

std::string_view to_string(Detector detector);
/// Accepts "lof" / "if" and the long names. Throws InvalidArgument.
Detector parse_detector(std::string_view name);

// ---------------------------------------------------------------------------
// Local Outlier Factor

/// LOF with exactly k nearest neighbors per point (distance ties resolved by
/// lower index). lrd(p) = 1 / max(mean reach-dist, 1e-12), so coincident
/// points stay finite. Requires n > k >= 1.
std::vector<double> lof_scores(const PointCloud& points, std::size_t k);

/// Fitted LOF that can also score points outside the training set.
class LofModel {
 public:
  LofModel(const PointCloud& points, std::size_t k);

  const std::vector<double>& training_scores() const noexcept { return scores_; }
  /// LOF of a query point against the training set (the query is not a neighbor of itself).
  double score(const Eigen::VectorXd& query) const;

 private:
  PointCloud points_;
  std::size_t k_;
  std::vector<double> k_distance_;
  std::vector<double> lrd_;
  std::vector<double> scores_;
};

// ---------------------------------------------------------------------------
// Isolation Forest

/// Average path length of an unsuccessful BST search among n points;
/// c(1) = 0, c(2) = 1.
double average_path_length(std::size_t n);

class IsolationForestModel {
 public:
  /// Each tree is grown on a uniform subsample of min(subsample_size, n)
  /// points drawn without replacement, with height limit ceil(log2(psi)).
  /// Split attributes are drawn among the non-constant ones, split values
  /// uniformly in (min, max). Deterministic for a fixed seed.
  static IsolationForestModel fit(const PointCloud& points, std::size_t tree_count,
                                  std::size_t subsample_size, std::uint64_t seed);

  /// s(x) = 2^(-E[h(x)] / c(psi)), in (0, 1); higher is more anomalous.
  double score(const Eigen::VectorXd& point) const;
  std::vector<double> scores(const PointCloud& points) const;

  std::size_t tree_count() const noexcept { return trees_.size(); }
  std::size_t subsample_size() const noexcept { return subsample_; }
  std::size_t max_depth() const noexcept { return max_depth_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double split = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::size_t size = 0;
  };
  using Tree = std::vector<Node>;

  double path_length(const Tree& tree, const Eigen::VectorXd& point) const;

  std::vector<Tree> trees_;
  std::size_t subsample_ = 0;
  std::size_t max_depth_ = 0;
  std::uint64_t seed_ = 0;
};

// ---------------------------------------------------------------------------
// Thresholding and evaluation

/// Flags exactly floor(contamination * n) highest scores; ties go to the lower
/// index. Requires 0 < contamination < 0.5.
std::vector<bool> threshold_by_contamination(std::span<const double> scores, double contamination);

struct DetectionMetrics {
  double accuracy = 0.0;
  /// Over the outlier class; 0 when the denominator is 0.
  double precision = 0.0;
  double recall = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t true_negatives = 0;
  std::size_t false_negatives = 0;
};

/// Throws LengthMismatch.
DetectionMetrics evaluate_detection(const std::vector<bool>& flags, const std::vector<bool>& truth);

struct DetectorParams {
  std::size_t lof_k = 20;
  std::size_t tree_count = 100;
  std::size_t subsample_size = 256;
  std::uint64_t seed = 0;
  double contamination = 0.04;
};

struct ScoreReport {
  Detector detector = Detector::IsolationForest;
  DetectorParams params;
  std::vector<double> scores;
  std::vector<bool> flagged;
};

/// Scores with the chosen detector (LOF k capped at n-1, subsample capped at n)
/// and flags by contamination.
ScoreReport detect(const PointCloud& points, Detector detector, const DetectorParams& params);

// Score report CSV: trajectory_id,detector,score,flagged
std::string score_report_to_csv(std::span<const std::string> ids, const ScoreReport& report);

struct ScoreRow {
  std::string id;
  std::string detector;
  double score = 0.0;
  bool flagged = false;
};
std::vector<ScoreRow> score_report_from_csv(const std::string& text);

struct GridSample {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
};

/// Detector score on a resolution x resolution lattice over the bounding box
/// of a 2-D point cloud, padded by 10% per side. Throws InvalidArgument for
/// other dimensions.
std::vector<GridSample> decision_grid(const PointCloud& points, Detector detector,
                                      const DetectorParams& params, std::size_t resolution);

// Decision grid CSV: x,y,score
std::string decision_grid_to_csv(std::span<const GridSample> grid);
std::vector<GridSample> decision_grid_from_csv(const std::string& text);

}  // namespace flowembed

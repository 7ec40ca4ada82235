#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flowembed/geo.hpp"
#include "flowembed/outlier.hpp"
#include "flowembed/spectral.hpp"
#include "flowembed/synthetic.hpp"
#include "flowembed/trajectory.hpp"

namespace flowembed {

/// Non-fatal conditions reported by the commands; the CLI prints them to stderr.
using Warnings = std::vector<std::string>;

// ---------------------------------------------------------------------------
// synth-generate

struct GeneratedFiles {
  std::filesystem::path complex;
  std::filesystem::path coords;
  std::filesystem::path trajectories;
  std::filesystem::path labels;
  std::size_t trajectory_count = 0;
};

/// Writes complex.json, coords.csv, trajectories.csv and labels.csv into
/// out_dir. Throws IoError naming the path.
GeneratedFiles cmd_synth_generate(const SyntheticConfig& config, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// embed

/// Flattened embeddings of every trajectory; labels attached when given
/// (matched by id). Throws ValidationError when label ids and trajectory ids differ.
EmbeddingTable embed_trajectories(const SimplicialComplex& sc, const HarmonicBasis& basis,
                                  std::span<const TrajectoryPath> trajectories,
                                  std::span<const LabelRow> labels = {});

/// `edge,tail,head,h_0,...` with 1-based vertices.
std::string basis_to_csv(const SimplicialComplex& sc, const HarmonicBasis& basis);

struct EmbedOptions {
  std::filesystem::path complex_file;
  std::filesystem::path trajectories_file;
  std::filesystem::path out_file;
  std::optional<std::filesystem::path> labels_file;
  std::optional<std::filesystem::path> basis_file;
  HarmonicOptions harmonic;
};

struct EmbedResult {
  EmbeddingTable table;
  std::size_t betti = 0;
  Warnings warnings;
};

EmbedResult cmd_embed(const EmbedOptions& options);

// ---------------------------------------------------------------------------
// detect

struct DetectOptions {
  std::filesystem::path embedding_file;
  std::filesystem::path out_file;
  Detector detector = Detector::IsolationForest;
  DetectorParams params;
  /// Decision-function lattice for contour plots (2-D embeddings only).
  std::optional<std::filesystem::path> grid_file;
  std::size_t grid_resolution = 60;
};

struct DetectResult {
  std::vector<std::string> ids;
  ScoreReport report;
  Warnings warnings;
};

DetectResult cmd_detect(const DetectOptions& options);

// ---------------------------------------------------------------------------
// experiment

struct ExperimentConfig {
  std::size_t dataset_count = 100;
  SyntheticConfig synthetic;
  /// Detector parameters shared by both detectors; `seed` drives Isolation Forest.
  DetectorParams detector;
  std::uint64_t master_seed = 0;
  std::size_t parallelism = 1;
};

struct DatasetResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t betti = 0;
  std::size_t trajectory_count = 0;
  DetectionMetrics lof;
  DetectionMetrics iforest;
  double seconds = 0.0;
};

struct AggregateMetrics {
  double mean_accuracy = 0.0;
  /// Accuracy over all labels of all datasets at once.
  double pooled_accuracy = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double min_accuracy = 0.0;
  double max_accuracy = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<DatasetResult> datasets;
  AggregateMetrics lof;
  AggregateMetrics iforest;
  double total_seconds = 0.0;
};

/// Dataset i uses seed derive_seed(master_seed, i) and is processed end to end
/// by one worker. A failing dataset aborts the run with an Error naming its
/// index and seed (the lowest failing index when several fail).
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Everything except timings; byte-identical for identical configs.
std::string experiment_report_json(const ExperimentReport& report);
std::string experiment_timings_json(const ExperimentReport& report);
std::string experiment_table(const ExperimentReport& report);

/// Writes report.json and timings.json into out_dir.
void write_experiment_report(const ExperimentReport& report, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// plot

struct PlotInputs {
  std::optional<std::filesystem::path> complex_file;
  std::optional<std::filesystem::path> coords_file;
  std::optional<std::filesystem::path> trajectories_file;
  std::optional<std::filesystem::path> labels_file;
  std::optional<std::filesystem::path> embedding_file;
  std::optional<std::filesystem::path> scores_file;
  std::optional<std::filesystem::path> grid_file;
  /// Draw incremental polylines in the embedding plot (needs complex and trajectories).
  bool polylines = false;
};

/// Emits map.svg, embedding.svg and detection.svg for whichever inputs are
/// present. Throws ValidationError naming ids that appear in one file but
/// not another, or InvalidArgument when nothing can be plotted.
std::vector<std::filesystem::path> cmd_plot(const PlotInputs& inputs, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// geo

struct GeoOptions {
  std::filesystem::path tracks_file;
  TrackColumns columns;
  std::optional<std::filesystem::path> mask_file;
  /// Derived from the tracks, padded by one cell width, when absent.
  std::optional<GeoBox> bbox;
  double cell_width_deg = 0.86;
  DetectorParams detector;
  std::optional<std::filesystem::path> out_dir;
};

struct GeoResult {
  HexGrid grid;
  std::vector<TrajectoryPath> trajectories;
  EmbeddingTable embeddings;
  std::size_t betti = 0;
  ScoreReport lof;
  ScoreReport iforest;
  /// Tracks that collapse into a single cell.
  std::vector<std::string> skipped;
  Warnings warnings;
};

/// Grid, mask, discretization, embedding and both detectors. With out_dir set
/// writes complex.json, centers.csv, coords.csv (x = lon, y = lat),
/// trajectories.csv, embeddings.csv, scores_lof.csv and scores_iforest.csv.
GeoResult run_geo_pipeline(const std::vector<Track>& tracks, const std::optional<LandMask>& mask,
                           const GeoOptions& options);
GeoResult cmd_geo_pipeline(const GeoOptions& options);

}  // namespace flowembed

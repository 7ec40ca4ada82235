#include "flowembed/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "flowembed/complex.hpp"
#include "flowembed/csv.hpp"
#include "flowembed/error.hpp"
#include "flowembed/plot.hpp"
#include "flowembed/rng.hpp"

namespace flowembed {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Lists ids present in one set but not the other, at most five of each.
std::string describe_id_mismatch(const std::vector<std::string>& a, const std::string& a_name,
                                 const std::vector<std::string>& b, const std::string& b_name) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  auto list = [](const std::set<std::string>& from, const std::set<std::string>& other) {
    std::string out;
    std::size_t shown = 0, total = 0;
    for (const auto& id : from) {
      if (other.count(id)) continue;
      ++total;
      if (shown < 5) {
        out += (shown ? ", " : "") + id;
        ++shown;
      }
    }
    if (total > shown) out += ", ... (" + std::to_string(total) + " in total)";
    return out;
  };
  std::string message = "trajectory ids differ between " + a_name + " and " + b_name;
  if (const auto only_a = list(sa, sb); !only_a.empty()) message += "; only in " + a_name + ": " + only_a;
  if (const auto only_b = list(sb, sa); !only_b.empty()) message += "; only in " + b_name + ": " + only_b;
  if (sa == sb) message += "; duplicate ids";
  return message;
}

/// Position in `reference` of every id in `other`; throws ValidationError
/// unless both hold the same ids exactly once.
std::vector<std::size_t> align_ids(const std::vector<std::string>& reference, const std::string& reference_name,
                                   const std::vector<std::string>& other, const std::string& other_name) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < reference.size(); ++i) index.emplace(reference[i], i);
  bool ok = index.size() == reference.size() && other.size() == reference.size();
  std::vector<std::size_t> out;
  std::vector<bool> seen(reference.size(), false);
  for (std::size_t i = 0; ok && i < other.size(); ++i) {
    const auto it = index.find(other[i]);
    if (it == index.end() || seen[it->second]) {
      ok = false;
      break;
    }
    seen[it->second] = true;
    out.push_back(it->second);
  }
  if (!ok) throw Error(ErrorKind::ValidationError, describe_id_mismatch(reference, reference_name, other, other_name));
  return out;
}

nlohmann::ordered_json metrics_json(const DetectionMetrics& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["true_positives"] = m.true_positives;
  j["false_positives"] = m.false_positives;
  j["true_negatives"] = m.true_negatives;
  j["false_negatives"] = m.false_negatives;
  return j;
}

nlohmann::ordered_json aggregate_json(const AggregateMetrics& m) {
  nlohmann::ordered_json j;
  j["mean_accuracy"] = m.mean_accuracy;
  j["pooled_accuracy"] = m.pooled_accuracy;
  j["mean_precision"] = m.mean_precision;
  j["mean_recall"] = m.mean_recall;
  j["min_accuracy"] = m.min_accuracy;
  j["max_accuracy"] = m.max_accuracy;
  return j;
}

nlohmann::ordered_json box_json(const Box& b) { return {b.x_min, b.x_max, b.y_min, b.y_max}; }

AggregateMetrics aggregate(const std::vector<DatasetResult>& datasets, DetectionMetrics DatasetResult::*field) {
  AggregateMetrics out;
  if (datasets.empty()) return out;
  std::size_t agree = 0, total = 0;
  out.min_accuracy = 1.0;
  out.max_accuracy = 0.0;
  for (const DatasetResult& d : datasets) {
    const DetectionMetrics& m = d.*field;
    out.mean_accuracy += m.accuracy;
    out.mean_precision += m.precision;
    out.mean_recall += m.recall;
    out.min_accuracy = std::min(out.min_accuracy, m.accuracy);
    out.max_accuracy = std::max(out.max_accuracy, m.accuracy);
    agree += m.true_positives + m.true_negatives;
    total += m.true_positives + m.true_negatives + m.false_positives + m.false_negatives;
  }
  const double n = static_cast<double>(datasets.size());
  out.mean_accuracy /= n;
  out.mean_precision /= n;
  out.mean_recall /= n;
  out.pooled_accuracy = total ? static_cast<double>(agree) / static_cast<double>(total) : 0.0;
  return out;
}

DatasetResult run_dataset(const ExperimentConfig& config, std::size_t index) {
  const auto start = Clock::now();
  DatasetResult result;
  result.index = index;
  result.seed = derive_seed(config.master_seed, index);

  SyntheticConfig synthetic = config.synthetic;
  synthetic.seed = result.seed;
  const LabeledDataset dataset = generate_dataset(synthetic);
  const HarmonicBasis basis = harmonic_basis(hodge_laplacian(dataset.complex));
  const EmbeddingTable table = embed_trajectories(dataset.complex, basis, dataset.trajectories);
  const std::vector<bool> truth = dataset.outlier_mask();

  result.betti = basis.betti();
  result.trajectory_count = dataset.trajectories.size();
  result.lof = evaluate_detection(detect(table.points, Detector::LocalOutlierFactor, config.detector).flagged, truth);
  result.iforest = evaluate_detection(detect(table.points, Detector::IsolationForest, config.detector).flagged, truth);
  result.seconds = seconds_since(start);
  return result;
}

std::string table_row(const std::string& name, const AggregateMetrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-18s %10.4f %10.4f %10.4f %10.4f %10.4f %10.4f\n", name.c_str(),
                m.mean_accuracy, m.pooled_accuracy, m.min_accuracy, m.max_accuracy, m.mean_precision, m.mean_recall);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

GeneratedFiles cmd_synth_generate(const SyntheticConfig& config, const std::filesystem::path& out_dir) {
  const LabeledDataset dataset = generate_dataset(config);
  GeneratedFiles files;
  files.complex = out_dir / "complex.json";
  files.coords = out_dir / "coords.csv";
  files.trajectories = out_dir / "trajectories.csv";
  files.labels = out_dir / "labels.csv";
  write_complex_file(dataset.complex, files.complex);
  write_text_file(files.coords, coords_to_csv(dataset.coords));
  write_trajectories_file(dataset.trajectories, files.trajectories);
  write_text_file(files.labels, labels_to_csv(dataset));
  files.trajectory_count = dataset.trajectories.size();
  return files;
}

EmbeddingTable embed_trajectories(const SimplicialComplex& sc, const HarmonicBasis& basis,
                                  std::span<const TrajectoryPath> trajectories, std::span<const LabelRow> labels) {
  EmbeddingTable table;
  table.points.resize(static_cast<Eigen::Index>(trajectories.size()), static_cast<Eigen::Index>(basis.betti()));
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    table.ids.push_back(trajectories[i].id);
    table.points.row(static_cast<Eigen::Index>(i)) =
        flatten_embed(basis, path_to_flow(sc, trajectories[i].vertices)).transpose();
  }
  if (!labels.empty()) {
    std::vector<std::string> label_ids;
    for (const LabelRow& row : labels) label_ids.push_back(row.id);
    const auto order = align_ids(table.ids, "trajectories", label_ids, "labels");
    table.labels.resize(trajectories.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      table.labels[order[i]] = labels[i].outlier ? "outlier" : std::to_string(labels[i].label);
  }
  return table;
}

std::string basis_to_csv(const SimplicialComplex& sc, const HarmonicBasis& basis) {
  std::string out = "edge,tail,head";
  for (std::size_t k = 0; k < basis.betti(); ++k) out += ",h_" + std::to_string(k);
  out += '\n';
  for (std::size_t e = 0; e < sc.edge_count(); ++e) {
    out += std::to_string(e + 1) + ',' + std::to_string(sc.edges()[e].tail + 1) + ',' +
           std::to_string(sc.edges()[e].head + 1);
    for (std::size_t k = 0; k < basis.betti(); ++k)
      out += ',' + format_double(basis.basis(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(k)));
    out += '\n';
  }
  return out;
}

EmbedResult cmd_embed(const EmbedOptions& options) {
  const SimplicialComplex sc = read_complex_file(options.complex_file);
  const std::vector<TrajectoryPath> trajectories = read_trajectories_file(options.trajectories_file);
  std::vector<LabelRow> labels;
  if (options.labels_file) labels = labels_from_csv(read_text_file(*options.labels_file));

  EmbedResult result;
  const HarmonicBasis basis = harmonic_basis(hodge_laplacian(sc), options.harmonic);
  result.betti = basis.betti();
  if (result.betti == 0)
    result.warnings.push_back("beta_1 = 0: the complex has no holes, every embedding is the empty vector "
                              "and detection is meaningless");
  result.table = embed_trajectories(sc, basis, trajectories, labels);
  if (options.labels_file && labels.empty() && !trajectories.empty())
    throw Error(ErrorKind::ValidationError, describe_id_mismatch(result.table.ids, "trajectories", {}, "labels"));
  write_text_file(options.out_file, embeddings_to_csv(result.table));
  if (options.basis_file) write_text_file(*options.basis_file, basis_to_csv(sc, basis));
  return result;
}

DetectResult cmd_detect(const DetectOptions& options) {
  const EmbeddingTable table = embeddings_from_csv(read_text_file(options.embedding_file));
  DetectResult result;
  result.ids = table.ids;
  result.report.detector = options.detector;
  result.report.params = options.params;
  if (table.points.rows() == 0) {
    result.warnings.push_back("embedding file has no rows; nothing to score");
  } else {
    if (table.points.cols() == 0) result.warnings.push_back("zero-dimensional embedding: all scores are equal");
    result.report = detect(table.points, options.detector, options.params);
  }
  write_text_file(options.out_file, score_report_to_csv(result.ids, result.report));
  if (options.grid_file) {
    if (table.points.rows() < 2) throw Error(ErrorKind::InvalidArgument, "a decision grid needs at least 2 points");
    write_text_file(*options.grid_file,
                    decision_grid_to_csv(decision_grid(table.points, options.detector, options.params,
                                                       options.grid_resolution)));
  }
  return result;
}

// ---------------------------------------------------------------------------

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.dataset_count == 0) throw Error(ErrorKind::InvalidArgument, "dataset_count must be at least 1");
  if (!(config.detector.contamination > 0.0 && config.detector.contamination < 0.5))
    throw Error(ErrorKind::InvalidArgument, "contamination must lie in (0, 0.5)");
  validate(config.synthetic);

  const auto start = Clock::now();
  const std::size_t n = config.dataset_count;
  std::vector<DatasetResult> results(n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (std::size_t i = next++; i < n && !failed.load(); i = next++) {
      try {
        results[i] = run_dataset(config, i);
      } catch (...) {
        failures[i] = std::current_exception();
        failed = true;
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(config.parallelism, 1, n);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i]) continue;
    const std::string where =
        "dataset " + std::to_string(i) + " (seed " + std::to_string(derive_seed(config.master_seed, i)) + ")";
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::InvalidArgument, where + ": " + e.what());
    }
  }

  ExperimentReport report;
  report.config = config;
  report.datasets = std::move(results);
  report.lof = aggregate(report.datasets, &DatasetResult::lof);
  report.iforest = aggregate(report.datasets, &DatasetResult::iforest);
  report.total_seconds = seconds_since(start);
  return report;
}

std::string experiment_report_json(const ExperimentReport& report) {
  const ExperimentConfig& c = report.config;
  nlohmann::ordered_json j;
  auto& cfg = j["config"];
  cfg["dataset_count"] = c.dataset_count;
  cfg["master_seed"] = c.master_seed;
  cfg["contamination"] = c.detector.contamination;
  cfg["lof_k"] = c.detector.lof_k;
  cfg["tree_count"] = c.detector.tree_count;
  cfg["subsample_size"] = c.detector.subsample_size;
  cfg["detector_seed"] = c.detector.seed;
  cfg["point_count"] = c.synthetic.point_count;
  cfg["outlier_count"] = c.synthetic.outlier_count;
  cfg["weight_growth"] = c.synthetic.weight_growth;
  cfg["outlier_candidates"] = c.synthetic.outlier_candidates;
  cfg["holes"] = nlohmann::ordered_json::array();
  for (const HoleSpec& h : c.synthetic.holes) cfg["holes"].push_back({h.center.x, h.center.y, h.radius});
  cfg["classes"] = nlohmann::ordered_json::array();
  for (const ClassSpec& cls : c.synthetic.classes) {
    nlohmann::ordered_json entry;
    entry["source"] = box_json(cls.source);
    entry["target"] = box_json(cls.target);
    entry["count"] = cls.count;
    cfg["classes"].push_back(entry);
  }
  j["aggregate"]["lof"] = aggregate_json(report.lof);
  j["aggregate"]["iforest"] = aggregate_json(report.iforest);
  j["datasets"] = nlohmann::ordered_json::array();
  for (const DatasetResult& d : report.datasets) {
    nlohmann::ordered_json entry;
    entry["index"] = d.index;
    entry["seed"] = d.seed;
    entry["betti_1"] = d.betti;
    entry["trajectories"] = d.trajectory_count;
    entry["lof"] = metrics_json(d.lof);
    entry["iforest"] = metrics_json(d.iforest);
    j["datasets"].push_back(entry);
  }
  return j.dump(2) + "\n";
}

std::string experiment_timings_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["parallelism"] = report.config.parallelism;
  j["total_seconds"] = report.total_seconds;
  j["datasets"] = nlohmann::ordered_json::array();
  for (const DatasetResult& d : report.datasets) j["datasets"].push_back({{"index", d.index}, {"seconds", d.seconds}});
  return j.dump(2) + "\n";
}

std::string experiment_table(const ExperimentReport& report) {
  char head[160];
  std::snprintf(head, sizeof head, "%-18s %10s %10s %10s %10s %10s %10s\n", "detector", "mean_acc", "pooled_acc",
                "min_acc", "max_acc", "precision", "recall");
  std::string out = head;
  out += table_row("lof", report.lof);
  out += table_row("iforest", report.iforest);
  char tail[160];
  std::snprintf(tail, sizeof tail, "%zu datasets, %.1f s wall clock, parallelism %zu\n", report.datasets.size(),
                report.total_seconds, report.config.parallelism);
  return out + tail;
}

void write_experiment_report(const ExperimentReport& report, const std::filesystem::path& out_dir) {
  write_text_file(out_dir / "report.json", experiment_report_json(report));
  write_text_file(out_dir / "timings.json", experiment_timings_json(report));
}

// ---------------------------------------------------------------------------

std::vector<std::filesystem::path> cmd_plot(const PlotInputs& inputs, const std::filesystem::path& out_dir) {
  std::optional<SimplicialComplex> sc;
  std::vector<Point2> coords;
  std::optional<std::vector<TrajectoryPath>> trajectories;
  std::optional<std::vector<LabelRow>> labels;
  std::optional<EmbeddingTable> embedding;
  std::optional<std::vector<ScoreRow>> scores;
  std::vector<GridSample> grid;

  if (inputs.complex_file) sc = read_complex_file(*inputs.complex_file);
  if (inputs.coords_file) coords = coords_from_csv(read_text_file(*inputs.coords_file));
  if (inputs.trajectories_file) trajectories = read_trajectories_file(*inputs.trajectories_file);
  if (inputs.labels_file) labels = labels_from_csv(read_text_file(*inputs.labels_file));
  if (inputs.embedding_file) embedding = embeddings_from_csv(read_text_file(*inputs.embedding_file));
  if (inputs.scores_file) scores = score_report_from_csv(read_text_file(*inputs.scores_file));
  if (inputs.grid_file) grid = decision_grid_from_csv(read_text_file(*inputs.grid_file));

  // Every id-bearing file must agree with the first one present.
  std::vector<std::pair<std::string, std::vector<std::string>>> id_sets;
  if (trajectories) {
    std::vector<std::string> ids;
    for (const auto& t : *trajectories) ids.push_back(t.id);
    id_sets.emplace_back("trajectories", std::move(ids));
  }
  if (labels) {
    std::vector<std::string> ids;
    for (const auto& l : *labels) ids.push_back(l.id);
    id_sets.emplace_back("labels", std::move(ids));
  }
  if (embedding) id_sets.emplace_back("embeddings", embedding->ids);
  if (scores) {
    std::vector<std::string> ids;
    for (const auto& s : *scores) ids.push_back(s.id);
    id_sets.emplace_back("scores", std::move(ids));
  }
  for (std::size_t k = 1; k < id_sets.size(); ++k)
    align_ids(id_sets[0].second, id_sets[0].first, id_sets[k].second, id_sets[k].first);

  auto label_for = [&](const std::vector<std::string>& ids) {
    std::vector<int> out;
    if (!labels) return out;
    std::unordered_map<std::string, int> by_id;
    for (const LabelRow& l : *labels) by_id[l.id] = l.outlier ? kOutlierLabel : l.label;
    for (const auto& id : ids) out.push_back(by_id.at(id));
    return out;
  };

  std::vector<std::filesystem::path> written;
  if (sc && inputs.coords_file && trajectories) {
    std::vector<std::string> ids;
    for (const auto& t : *trajectories) ids.push_back(t.id);
    const auto path = out_dir / "map.svg";
    write_text_file(path, map_svg(*sc, coords, *trajectories, label_for(ids)));
    written.push_back(path);
  }
  if (embedding) {
    std::vector<EmbeddedPolyline> polylines;
    if (inputs.polylines) {
      if (!sc || !trajectories)
        throw Error(ErrorKind::InvalidArgument, "polylines need the complex and the trajectories");
      const HarmonicBasis basis = harmonic_basis(hodge_laplacian(*sc));
      std::unordered_map<std::string, const TrajectoryPath*> by_id;
      for (const auto& t : *trajectories) by_id[t.id] = &t;
      for (const auto& id : embedding->ids) polylines.push_back(incremental_embed(basis, *sc, by_id.at(id)->vertices));
    }
    const auto path = out_dir / "embedding.svg";
    write_text_file(path, embedding_svg(embedding->points, label_for(embedding->ids), polylines));
    written.push_back(path);
  }
  if (embedding && scores) {
    std::unordered_map<std::string, const ScoreRow*> by_id;
    for (const auto& s : *scores) by_id[s.id] = &s;
    std::vector<double> values;
    std::vector<bool> flagged;
    Detector detector = Detector::IsolationForest;
    for (const auto& id : embedding->ids) {
      const ScoreRow& row = *by_id.at(id);
      values.push_back(row.score);
      flagged.push_back(row.flagged);
      detector = parse_detector(row.detector);
    }
    const auto path = out_dir / "detection.svg";
    write_text_file(path, detection_svg(embedding->points, values, flagged, detector, grid));
    written.push_back(path);
  }
  if (written.empty())
    throw Error(ErrorKind::InvalidArgument,
                "nothing to plot: give complex, coords and trajectories, or an embedding file");
  return written;
}

// ---------------------------------------------------------------------------

GeoResult run_geo_pipeline(const std::vector<Track>& tracks, const std::optional<LandMask>& mask,
                           const GeoOptions& options) {
  GeoBox bbox;
  if (options.bbox) {
    bbox = *options.bbox;
  } else {
    bool any = false;
    for (const Track& t : tracks) {
      for (const TrackPoint& p : t.points) {
        if (!any) {
          bbox = {p.lat, p.lat, p.lon, p.lon};
          any = true;
        }
        bbox.lat_min = std::min(bbox.lat_min, p.lat);
        bbox.lat_max = std::max(bbox.lat_max, p.lat);
        bbox.lon_min = std::min(bbox.lon_min, p.lon);
        bbox.lon_max = std::max(bbox.lon_max, p.lon);
      }
    }
    if (!any) throw Error(ErrorKind::EmptyGrid, "no track points to derive a bounding box from");
    const double pad = options.cell_width_deg;
    bbox.lat_min = std::max(-89.0, bbox.lat_min - pad);
    bbox.lat_max = std::min(89.0, bbox.lat_max + pad);
    bbox.lon_min -= pad;
    bbox.lon_max += pad;
  }

  GeoResult result{HexGrid::build(bbox, options.cell_width_deg), {}, {}, 0, {}, {}, {}, {}};
  if (mask) result.grid = result.grid.masked(*mask);

  for (const Track& track : tracks) {
    try {
      result.trajectories.push_back(discretize_track(result.grid, track.points, track.individual_id));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateTrack) throw;
      result.skipped.push_back(track.individual_id);
      result.warnings.push_back(std::string("skipped: ") + e.what());
    }
  }

  const SimplicialComplex& sc = result.grid.complex();
  const HarmonicBasis basis = harmonic_basis(hodge_laplacian(sc));
  result.betti = basis.betti();
  if (result.betti == 0) result.warnings.push_back("beta_1 = 0: the masked grid has no holes");
  result.embeddings = embed_trajectories(sc, basis, result.trajectories);
  if (result.trajectories.size() >= 2) {
    result.lof = detect(result.embeddings.points, Detector::LocalOutlierFactor, options.detector);
    result.iforest = detect(result.embeddings.points, Detector::IsolationForest, options.detector);
  } else {
    result.warnings.push_back("fewer than 2 usable tracks; detection skipped");
    result.lof.detector = Detector::LocalOutlierFactor;
  }

  if (options.out_dir) {
    const auto& dir = *options.out_dir;
    write_complex_file(sc, dir / "complex.json");
    write_text_file(dir / "centers.csv", centers_to_csv(result.grid));
    std::vector<Point2> plane;
    for (const GeoPoint& c : result.grid.centers()) plane.push_back({c.lon, c.lat});
    write_text_file(dir / "coords.csv", coords_to_csv(plane));
    write_trajectories_file(result.trajectories, dir / "trajectories.csv");
    write_text_file(dir / "embeddings.csv", embeddings_to_csv(result.embeddings));
    write_text_file(dir / "scores_lof.csv", score_report_to_csv(result.embeddings.ids, result.lof));
    write_text_file(dir / "scores_iforest.csv", score_report_to_csv(result.embeddings.ids, result.iforest));
  }
  return result;
}

GeoResult cmd_geo_pipeline(const GeoOptions& options) {
  const std::vector<Track> tracks = ingest_tracks_csv(options.tracks_file, options.columns);
  std::optional<LandMask> mask;
  if (options.mask_file) mask = read_land_mask_file(*options.mask_file);
  return run_geo_pipeline(tracks, mask, options);
}

}  // namespace flowembed

// flowembed: trajectory outlier detection through harmonic edge-flow embeddings.

#include <cstdio>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "flowembed/csv.hpp"
#include "flowembed/error.hpp"
#include "flowembed/pipeline.hpp"

using namespace flowembed;

namespace {

void print_warnings(const Warnings& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

std::vector<double> parse_numbers(const std::string& text, char sep, std::size_t expected, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(sep, start);
    const auto value = parse_double(trim(std::string_view(text).substr(start, end - start)));
    if (!value) throw Error(ErrorKind::InvalidArgument, "malformed " + what + " '" + text + "'");
    out.push_back(*value);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  if (out.size() != expected)
    throw Error(ErrorKind::InvalidArgument,
                what + " '" + text + "' needs " + std::to_string(expected) + " comma-separated numbers");
  return out;
}

Box parse_box(const std::string& text) {
  const auto v = parse_numbers(text, ',', 4, "box");
  return {v[0], v[1], v[2], v[3]};
}

/// Command-line options shared by every subcommand that synthesizes data.
struct SyntheticFlags {
  std::size_t points = SyntheticConfig{}.point_count;
  std::size_t outliers = SyntheticConfig{}.outlier_count;
  double growth = SyntheticConfig{}.weight_growth;
  std::size_t candidates = SyntheticConfig{}.outlier_candidates;
  std::vector<std::string> holes;
  std::vector<std::string> classes;

  void add(CLI::App* cmd) {
    cmd->add_option("--points", points, "Number of uniform random points")->capture_default_str();
    cmd->add_option("--outliers", outliers, "Planted outlier trajectories per dataset")->capture_default_str();
    cmd->add_option("--growth", growth, "Edge weight multiplier after each class walk")->capture_default_str();
    cmd->add_option("--candidates", candidates, "Waypoints tried per planted outlier")->capture_default_str();
    cmd->add_option("--hole", holes, "Hole as x,y,radius (repeatable; replaces the defaults)");
    cmd->add_option("--class", classes,
                    "Class as sx0,sx1,sy0,sy1:tx0,tx1,ty0,ty1[:count] (repeatable; replaces the defaults)");
  }

  SyntheticConfig config(std::uint64_t seed) const {
    SyntheticConfig c;
    c.point_count = points;
    c.outlier_count = outliers;
    c.weight_growth = growth;
    c.outlier_candidates = candidates;
    c.seed = seed;
    if (!holes.empty()) {
      c.holes.clear();
      for (const auto& h : holes) {
        const auto v = parse_numbers(h, ',', 3, "hole");
        c.holes.push_back({{v[0], v[1]}, v[2]});
      }
    }
    if (!classes.empty()) {
      c.classes.clear();
      for (const auto& text : classes) {
        const auto first = text.find(':');
        if (first == std::string::npos)
          throw Error(ErrorKind::InvalidArgument, "class '" + text + "' needs source:target");
        const auto second = text.find(':', first + 1);
        ClassSpec cls;
        cls.source = parse_box(text.substr(0, first));
        cls.target = parse_box(text.substr(first + 1, second == std::string::npos ? std::string::npos
                                                                                   : second - first - 1));
        if (second != std::string::npos) {
          const auto count = parse_integer(trim(std::string_view(text).substr(second + 1)));
          if (!count || *count <= 0) throw Error(ErrorKind::InvalidArgument, "class '" + text + "' has a bad count");
          cls.count = static_cast<std::size_t>(*count);
        }
        c.classes.push_back(cls);
      }
    }
    validate(c);
    return c;
  }
};

struct DetectorFlags {
  DetectorParams params;

  void add(CLI::App* cmd) {
    cmd->add_option("--k", params.lof_k, "LOF neighbors (capped at n-1)")->capture_default_str();
    cmd->add_option("--trees", params.tree_count, "Isolation Forest trees")->capture_default_str();
    cmd->add_option("--subsample", params.subsample_size, "Isolation Forest subsample (capped at n)")
        ->capture_default_str();
    cmd->add_option("--detector-seed", params.seed, "Isolation Forest seed")->capture_default_str();
    cmd->add_option("--contamination", params.contamination, "Fraction of points flagged")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 0.5));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological trajectory outlier detection with harmonic edge-flow embeddings"};
  app.set_config("--config", "", "TOML file setting any option; command-line flags take precedence");
  app.require_subcommand(1);

  // synth-generate
  auto* gen = app.add_subcommand("synth-generate", "Generate a synthetic two-hole dataset");
  SyntheticFlags gen_synth;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen_synth.add(gen);
  gen->add_option("--seed", gen_seed, "Dataset seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->required();

  // embed
  auto* emb = app.add_subcommand("embed", "Flattened harmonic embeddings of trajectories");
  EmbedOptions emb_opts;
  std::string emb_complex, emb_traj, emb_out, emb_labels, emb_basis;
  double emb_zero_tol = 0.0;
  emb->add_option("--complex", emb_complex, "Complex JSON")->required();
  emb->add_option("--trajectories", emb_traj, "Trajectory CSV")->required();
  emb->add_option("--out", emb_out, "Embedding CSV to write")->required();
  emb->add_option("--labels", emb_labels, "Labels CSV to attach");
  emb->add_option("--basis", emb_basis, "Also write the harmonic basis as CSV");
  emb->add_option("--zero-tol", emb_zero_tol, "Eigenvalue cut (default: relative to the largest eigenvalue)");
  emb->add_option("--dense-threshold", emb_opts.harmonic.dense_threshold,
                  "Largest edge count solved densely")->capture_default_str();

  // detect
  auto* det = app.add_subcommand("detect", "Score embedded trajectories");
  DetectOptions det_opts;
  DetectorFlags det_flags;
  std::string det_in, det_out, det_grid, det_name = "iforest";
  det->add_option("--embedding", det_in, "Embedding CSV")->required();
  det->add_option("--out", det_out, "Score report CSV to write")->required();
  det->add_option("--detector", det_name, "lof or iforest")->capture_default_str();
  det_flags.add(det);
  det->add_option("--grid", det_grid, "Also write the decision function on a lattice");
  det->add_option("--grid-resolution", det_opts.grid_resolution, "Lattice points per axis")->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Repeat generate, embed and detect over many seeds");
  ExperimentConfig exp_cfg;
  SyntheticFlags exp_synth;
  DetectorFlags exp_flags;
  std::string exp_out;
  exp_cfg.parallelism = std::max(1u, std::thread::hardware_concurrency());
  exp->add_option("--datasets", exp_cfg.dataset_count, "Number of datasets")->capture_default_str();
  exp->add_option("--master-seed", exp_cfg.master_seed, "Seed fanned out to every dataset")->capture_default_str();
  exp->add_option("--parallelism", exp_cfg.parallelism, "Worker threads")->capture_default_str();
  exp->add_option("--out-dir", exp_out, "Write report.json and timings.json here");
  exp_synth.add(exp);
  exp_flags.add(exp);

  // plot
  auto* plt = app.add_subcommand("plot", "Render SVG figures");
  PlotInputs plot_in;
  std::string plot_out;
  std::string p_complex, p_coords, p_traj, p_labels, p_emb, p_scores, p_grid;
  plt->add_option("--complex", p_complex, "Complex JSON");
  plt->add_option("--coords", p_coords, "Vertex coordinates CSV");
  plt->add_option("--trajectories", p_traj, "Trajectory CSV");
  plt->add_option("--labels", p_labels, "Labels CSV");
  plt->add_option("--embedding", p_emb, "Embedding CSV");
  plt->add_option("--scores", p_scores, "Score report CSV");
  plt->add_option("--grid", p_grid, "Decision grid CSV");
  plt->add_flag("--polylines", plot_in.polylines, "Draw incremental embeddings");
  plt->add_option("--out-dir", plot_out, "Directory for the SVG files")->required();

  // geo
  auto* geo = app.add_subcommand("geo", "Hexagonal-grid pipeline for geographic tracks");
  GeoOptions geo_opts;
  DetectorFlags geo_flags;
  std::string g_tracks, g_mask, g_columns, g_bbox, g_out;
  geo->add_option("--tracks", g_tracks, "Track CSV")->required();
  geo->add_option("--mask", g_mask, "GeoJSON land polygons");
  geo->add_option("--columns", g_columns, "key=value file mapping timestamp/lat/lon/individual to headers");
  geo->add_option("--col-timestamp", geo_opts.columns.timestamp)->capture_default_str();
  geo->add_option("--col-lat", geo_opts.columns.lat)->capture_default_str();
  geo->add_option("--col-lon", geo_opts.columns.lon)->capture_default_str();
  geo->add_option("--col-individual", geo_opts.columns.individual)->capture_default_str();
  geo->add_option("--bbox", g_bbox, "lat_min,lat_max,lon_min,lon_max (default: tracks plus one cell)");
  geo->add_option("--cell-width", geo_opts.cell_width_deg, "Hexagon width in degrees latitude")->capture_default_str();
  geo->add_option("--out-dir", g_out, "Directory for all artifacts")->required();
  geo_flags.add(geo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const auto files = cmd_synth_generate(gen_synth.config(gen_seed), gen_out);
      std::cout << "wrote " << files.trajectory_count << " trajectories to " << gen_out << '\n';
    } else if (*emb) {
      emb_opts.complex_file = emb_complex;
      emb_opts.trajectories_file = emb_traj;
      emb_opts.out_file = emb_out;
      if (!emb_labels.empty()) emb_opts.labels_file = emb_labels;
      if (!emb_basis.empty()) emb_opts.basis_file = emb_basis;
      if (emb->count("--zero-tol")) emb_opts.harmonic.zero_tol = emb_zero_tol;
      const auto result = cmd_embed(emb_opts);
      print_warnings(result.warnings);
      std::cout << "beta_1 = " << result.betti << ", " << result.table.ids.size() << " trajectories embedded\n";
    } else if (*det) {
      det_opts.embedding_file = det_in;
      det_opts.out_file = det_out;
      det_opts.detector = parse_detector(det_name);
      det_opts.params = det_flags.params;
      if (!det_grid.empty()) det_opts.grid_file = det_grid;
      const auto result = cmd_detect(det_opts);
      print_warnings(result.warnings);
      std::size_t flagged = 0;
      for (bool f : result.report.flagged) flagged += f ? 1 : 0;
      std::cout << flagged << " of " << result.ids.size() << " trajectories flagged\n";
    } else if (*exp) {
      exp_cfg.synthetic = exp_synth.config(0);
      exp_cfg.detector = exp_flags.params;
      const auto report = run_experiment(exp_cfg);
      if (!exp_out.empty()) write_experiment_report(report, exp_out);
      std::cout << experiment_table(report);
    } else if (*plt) {
      auto opt = [](const std::string& s) -> std::optional<std::filesystem::path> {
        if (s.empty()) return std::nullopt;
        return std::filesystem::path(s);
      };
      plot_in.complex_file = opt(p_complex);
      plot_in.coords_file = opt(p_coords);
      plot_in.trajectories_file = opt(p_traj);
      plot_in.labels_file = opt(p_labels);
      plot_in.embedding_file = opt(p_emb);
      plot_in.scores_file = opt(p_scores);
      plot_in.grid_file = opt(p_grid);
      for (const auto& path : cmd_plot(plot_in, plot_out)) std::cout << "wrote " << path.string() << '\n';
    } else if (*geo) {
      geo_opts.tracks_file = g_tracks;
      if (!g_mask.empty()) geo_opts.mask_file = g_mask;
      if (!g_columns.empty()) {
        // Flags given explicitly win over the mapping file.
        const TrackColumns mapped = parse_column_mapping(read_text_file(g_columns));
        if (!geo->count("--col-timestamp")) geo_opts.columns.timestamp = mapped.timestamp;
        if (!geo->count("--col-lat")) geo_opts.columns.lat = mapped.lat;
        if (!geo->count("--col-lon")) geo_opts.columns.lon = mapped.lon;
        if (!geo->count("--col-individual")) geo_opts.columns.individual = mapped.individual;
      }
      if (!g_bbox.empty()) {
        const auto v = parse_numbers(g_bbox, ',', 4, "bbox");
        geo_opts.bbox = GeoBox{v[0], v[1], v[2], v[3]};
      }
      geo_opts.detector = geo_flags.params;
      geo_opts.out_dir = g_out;
      const auto result = cmd_geo_pipeline(geo_opts);
      print_warnings(result.warnings);
      std::cout << "grid: " << result.grid.cell_count() << " cells, beta_1 = " << result.betti << ", "
                << result.trajectories.size() << " tracks\n";
      for (std::size_t i = 0; i < result.embeddings.ids.size(); ++i) {
        const bool lof = !result.lof.flagged.empty() && result.lof.flagged[i];
        const bool iforest = !result.iforest.flagged.empty() && result.iforest.flagged[i];
        if (lof || iforest)
          std::cout << "flagged " << result.embeddings.ids[i] << (lof ? " lof" : "") << (iforest ? " iforest" : "")
                    << '\n';
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

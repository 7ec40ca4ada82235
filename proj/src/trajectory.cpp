#include "flowembed/trajectory.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "flowembed/csv.hpp"
#include "flowembed/error.hpp"

namespace flowembed {

void validate_walk(const SimplicialComplex& sc, std::span<const VertexId> path) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] >= sc.vertex_count()) {
      throw Error(ErrorKind::NotAnEdge, "vertex " + std::to_string(path[i] + 1) + " at step " +
                                            std::to_string(i) + " is not in the complex");
    }
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!sc.edge_index(path[i], path[i + 1])) {
      throw Error(ErrorKind::NotAnEdge, "step " + std::to_string(i) + ": vertices " +
                                            std::to_string(path[i] + 1) + " and " +
                                            std::to_string(path[i + 1] + 1) + " are not adjacent");
    }
  }
}

EdgeFlow path_to_flow(const SimplicialComplex& sc, std::span<const VertexId> path) {
  if (path.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "a trajectory needs at least two vertices");
  }
  validate_walk(sc, path);
  EdgeFlow flow = EdgeFlow::Zero(static_cast<Eigen::Index>(sc.edge_count()));
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(*sc.edge_index(path[i], path[i + 1]));
    flow[e] += path[i] < path[i + 1] ? 1.0 : -1.0;
  }
  return flow;
}

EmbeddedPoint flatten_embed(const HarmonicBasis& h, const EdgeFlow& f) {
  if (static_cast<std::size_t>(f.size()) != h.edge_count()) {
    throw Error(ErrorKind::DimensionMismatch, "flow has " + std::to_string(f.size()) +
                                                  " entries, basis has " +
                                                  std::to_string(h.edge_count()) + " rows");
  }
  return h.basis.transpose() * f;
}

EmbeddedPolyline incremental_embed(const HarmonicBasis& h, const SimplicialComplex& sc,
                                   std::span<const VertexId> path) {
  if (path.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "a trajectory needs at least two vertices");
  }
  validate_walk(sc, path);
  if (h.edge_count() != sc.edge_count()) {
    throw Error(ErrorKind::DimensionMismatch, "basis and complex disagree on the edge count");
  }
  EmbeddedPolyline line;
  line.reserve(path.size());
  EmbeddedPoint current = EmbeddedPoint::Zero(static_cast<Eigen::Index>(h.betti()));
  line.push_back(current);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(*sc.edge_index(path[i], path[i + 1]));
    const double sign = path[i] < path[i + 1] ? 1.0 : -1.0;
    current += sign * h.basis.row(e).transpose();
    line.push_back(current);
  }
  return line;
}

std::vector<VertexId> concatenate_paths(std::span<const VertexId> first,
                                        std::span<const VertexId> second) {
  std::vector<VertexId> out(first.begin(), first.end());
  auto begin = second.begin();
  if (!out.empty() && !second.empty() && out.back() == second.front()) ++begin;
  out.insert(out.end(), begin, second.end());
  return out;
}

std::string trajectories_to_csv(std::span<const TrajectoryPath> trajectories) {
  std::string out = "trajectory_id,seq,vertex\n";
  for (const auto& t : trajectories) {
    const std::string id = csv_escape(t.id);
    for (std::size_t i = 0; i < t.vertices.size(); ++i) {
      out += id;
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += std::to_string(t.vertices[i] + 1);
      out += '\n';
    }
  }
  return out;
}

std::vector<TrajectoryPath> trajectories_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  if (table.header.empty()) return {};
  const std::size_t id_col = table.column("trajectory_id");
  const std::size_t seq_col = table.column("seq");
  const std::size_t vertex_col = table.column("vertex");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::map<long long, VertexId>> steps;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = std::to_string(table.lines[r]);
    if (row.size() <= std::max({id_col, seq_col, vertex_col})) {
      throw Error(ErrorKind::ParseError, "line " + line + ": too few fields");
    }
    const auto seq = parse_integer(row[seq_col]);
    const auto vertex = parse_integer(row[vertex_col]);
    if (!seq || !vertex || *vertex < 1) {
      throw Error(ErrorKind::ParseError, "line " + line + ": bad seq or vertex");
    }
    auto [it, inserted] = steps.try_emplace(row[id_col]);
    if (inserted) order.push_back(row[id_col]);
    if (!it->second.emplace(*seq, static_cast<VertexId>(*vertex - 1)).second) {
      throw Error(ErrorKind::ParseError, "line " + line + ": duplicate seq for trajectory '" +
                                             row[id_col] + "'");
    }
  }
  std::vector<TrajectoryPath> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    TrajectoryPath path{id, {}};
    for (const auto& [seq, v] : steps[id]) path.vertices.push_back(v);
    out.push_back(std::move(path));
  }
  return out;
}

void write_trajectories_file(std::span<const TrajectoryPath> trajectories,
                             const std::filesystem::path& path) {
  write_text_file(path, trajectories_to_csv(trajectories));
}

std::vector<TrajectoryPath> read_trajectories_file(const std::filesystem::path& path) {
  return trajectories_from_csv(read_text_file(path));
}

std::string embeddings_to_csv(const EmbeddingTable& table) {
  std::string out = "trajectory_id";
  for (Eigen::Index d = 0; d < table.points.cols(); ++d) out += ",dim_" + std::to_string(d);
  const bool labelled = !table.labels.empty();
  if (labelled) out += ",label";
  out += '\n';
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    out += csv_escape(table.ids[i]);
    for (Eigen::Index d = 0; d < table.points.cols(); ++d) {
      out += ',';
      out += format_double(table.points(static_cast<Eigen::Index>(i), d));
    }
    if (labelled) {
      out += ',';
      out += csv_escape(table.labels[i]);
    }
    out += '\n';
  }
  return out;
}

EmbeddingTable embeddings_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  const std::size_t id_col = table.column("trajectory_id");
  std::vector<std::size_t> dims;
  for (std::size_t d = 0;; ++d) {
    auto col = table.find_column("dim_" + std::to_string(d));
    if (!col) break;
    dims.push_back(*col);
  }
  const auto label_col = table.find_column("label");

  EmbeddingTable out;
  out.points.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(dims.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = std::to_string(table.lines[r]);
    if (row.size() != table.header.size()) {
      throw Error(ErrorKind::ParseError, "line " + line + ": expected " +
                                             std::to_string(table.header.size()) + " fields");
    }
    out.ids.push_back(row[id_col]);
    for (std::size_t d = 0; d < dims.size(); ++d) {
      const auto value = parse_double(row[dims[d]]);
      if (!value) throw Error(ErrorKind::ParseError, "line " + line + ": bad coordinate");
      out.points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = *value;
    }
    if (label_col) out.labels.push_back(row[*label_col]);
  }
  return out;
}

}  // namespace flowembed

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace qstar {

using Index = Eigen::Index;

/// Undirected edge with u < v.
struct Edge {
  Index u;
  Index v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable sparse undirected simple graph.
///
/// Adjacency is stored in CSR form. Every undirected edge {u, v} is present
/// as two arcs u->v and v->u; arcs are numbered 0..2L-1, the arcs leaving v
/// occupy [arc_begin(v), arc_end(v)) with targets sorted ascending, and
/// arc_reverse(a) gives the index of the opposite arc.
class Graph {
 public:
  Graph() = default;

  /// Builds a simple graph on n vertices. Self-loops are dropped and
  /// duplicate edges (in either orientation) are collapsed.
  static Graph from_edges(Index n, std::span<const std::pair<Index, Index>> edges);

  Index num_vertices() const { return static_cast<Index>(offsets_.size()) - 1; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  Index num_arcs() const { return static_cast<Index>(targets_.size()); }

  Index degree(Index v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const Index> neighbors(Index v) const {
    return {targets_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
  }

  Index arc_begin(Index v) const { return offsets_[v]; }
  Index arc_end(Index v) const { return offsets_[v + 1]; }
  Index arc_source(Index a) const { return sources_[a]; }
  Index arc_target(Index a) const { return targets_[a]; }
  Index arc_reverse(Index a) const { return reverse_[a]; }

  /// Undirected edges sorted lexicographically, u < v.
  const std::vector<Edge>& edges() const { return edges_; }
  /// Arc u->v for each entry of edges().
  Index edge_arc(Index e) const { return edge_arcs_[e]; }

  Eigen::VectorXd degree_vector() const;
  Eigen::SparseMatrix<double> adjacency_matrix() const;

  /// Identifier of each vertex in the source this graph was built from
  /// (input file ids, or ids of the parent graph for extracted components).
  const std::vector<std::int64_t>& original_ids() const { return original_ids_; }
  void set_original_ids(std::vector<std::int64_t> ids);

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.offsets_ == b.offsets_ && a.targets_ == b.targets_;
  }

 private:
  // offsets_ starts as {0} so that a default graph has zero vertices.
  std::vector<Index> offsets_{0};
  std::vector<Index> targets_;
  std::vector<Index> sources_;
  std::vector<Index> reverse_;
  std::vector<Edge> edges_;
  std::vector<Index> edge_arcs_;
  std::vector<std::int64_t> original_ids_;
};

/// Hard cluster assignment; labels are in [0, q).
struct Partition {
  std::vector<int> labels;
  int q = 0;

  /// Number of labels used by at least one vertex.
  int effective_count() const;
  /// Vertex count per label slot (length q).
  std::vector<Index> sizes() const;
  /// Throws std::invalid_argument unless every label lies in [0, q).
  void validate() const;
};

/// Reads a whitespace-separated edge list. '#' starts a comment; tokens past
/// the second on a line (weights, timestamps) are ignored. Vertex ids are
/// compacted to 0..N-1 in order of first appearance.
Graph load_edge_list(const std::filesystem::path& path);
Graph parse_edge_list(std::istream& in);

/// Writes one edge per line. The line order reproduces the vertex numbering
/// on reload; a vertex whose first mention would otherwise be out of order
/// (isolated vertices included) is introduced by a self-loop line "v v",
/// which loaders drop.
void write_edge_list(const Graph& g, const std::filesystem::path& path);
void write_edge_list(const Graph& g, std::ostream& out);

/// Induced subgraph on the largest connected component. Ties go to the
/// component containing the smallest original id. original_ids() of the
/// result refer to the input graph's original ids.
Graph largest_component(const Graph& g);

/// Connected-component label per vertex, components numbered by smallest
/// member vertex.
std::vector<Index> component_labels(const Graph& g);

}  // namespace qstar

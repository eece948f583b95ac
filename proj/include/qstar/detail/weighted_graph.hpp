#pragma once

#include <utility>
#include <vector>

#include "qstar/graph.hpp"
#include "qstar/rng.hpp"

namespace qstar::detail {

// Graph with integer-valued edge weights and self-loops, used for the
// aggregation levels of the greedy methods. A self-loop of weight w adds 2w
// to the strength of its vertex, so total strength stays 2L.
struct WeightedGraph {
  std::vector<std::vector<std::pair<Index, double>>> adj;  // no self entries
  std::vector<double> self_loop;
  std::vector<double> strength;
  // Sum of squared original degrees of the vertices merged into each node.
  std::vector<double> square_degree;
  double total_strength = 0.0;
  // -sum_i p_i log2 p_i over the original vertices.
  double vertex_entropy = 0.0;

  Index size() const { return static_cast<Index>(adj.size()); }

  static WeightedGraph from_graph(const Graph& g);
};

// Merges the nodes of each label into one node; labels must be 0..count-1.
WeightedGraph aggregate(const WeightedGraph& wg, const std::vector<int>& labels, int count);

// Objectives of a node partition, equal to those of the unfolded partition
// of the original graph.
double weighted_modularity(const WeightedGraph& wg, const std::vector<int>& labels, double alpha);
double weighted_codelength(const WeightedGraph& wg, const std::vector<int>& labels);

// One level of local moves starting from singletons. Returns compacted
// labels (0..count-1 in order of first appearance) and sets `moved` when
// any vertex changed cluster.
std::vector<int> modularity_local_moves(const WeightedGraph& wg, double alpha, Rng& rng, bool& moved);
std::vector<int> codelength_local_moves(const WeightedGraph& wg, Rng& rng, bool& moved);

// Renumbers labels to 0..count-1 in order of first appearance.
int compact_labels(std::vector<int>& labels);

}  // namespace qstar::detail

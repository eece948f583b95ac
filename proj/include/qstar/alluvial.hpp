#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "qstar/bp.hpp"
#include "qstar/graph.hpp"
#include "qstar/harness.hpp"

namespace qstar {

/// Marginal threshold above which an assignment counts as significant.
inline constexpr double kSignificanceLevel = 0.9;

inline bool is_significant(double max_marginal) { return max_marginal > kSignificanceLevel; }

/// Hard partition at one q. Nonempty clusters are numbered 0..k-1 by size,
/// largest first (ties to the smaller argmax channel).
struct AlluvialLayer {
  int q = 0;
  std::vector<int> labels;
  std::vector<double> max_marginal;
  std::vector<char> significant;
  std::vector<Index> cluster_sizes;

  friend bool operator==(const AlluvialLayer&, const AlluvialLayer&) = default;
};

struct ClusterFlow {
  int from_cluster = 0;
  int to_cluster = 0;
  Index size = 0;
  /// Vertices significant at both ends of the flow.
  Index significant_size = 0;

  friend bool operator==(const ClusterFlow&, const ClusterFlow&) = default;
};

/// Link between consecutive layers.
struct AlluvialLink {
  int q_from = 0;
  int q_to = 0;
  std::vector<ClusterFlow> flows;
  /// One-to-one (from, to) pairs chosen greedily by largest overlap.
  std::vector<std::pair<int, int>> matching;
  /// For each cluster of the q_to layer, the q_from cluster it overlaps
  /// most; several clusters sharing a parent record a refinement.
  std::vector<int> parents;

  friend bool operator==(const AlluvialLink&, const AlluvialLink&) = default;
};

struct AlluvialBundle {
  Index n = 0;
  std::vector<AlluvialLayer> layers;
  std::vector<AlluvialLink> links;

  friend bool operator==(const AlluvialBundle&, const AlluvialBundle&) = default;
};

AlluvialLayer make_layer(const Marginals& marginals);
AlluvialLink link_layers(const AlluvialLayer& from, const AlluvialLayer& to);

/// Layers for the given marginals in the order given, linked consecutively.
AlluvialBundle build_bundle(const std::vector<Marginals>& marginals);

/// Bundle from a sweep run with keep_marginals, for the listed q values.
/// Throws InvalidStateError when a listed q has no stored marginals.
AlluvialBundle build_bundle(const SweepReport& report, const std::vector<int>& q_list);

/// Writes map_q<q>.txt per layer and flows.json into `dir` (created if
/// missing). Throws IoError on failure.
void export_alluvial(const AlluvialBundle& bundle, const std::filesystem::path& dir);

/// Reads a directory written by export_alluvial.
AlluvialBundle load_alluvial(const std::filesystem::path& dir);

}  // namespace qstar

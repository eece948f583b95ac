#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qstar/graph.hpp"

namespace qstar {

enum class GreedyMethod { louvain, infomap };

std::string to_string(GreedyMethod method);

struct GreedyResult {
  Partition partition;  // labels compacted to 0..q_star-1
  /// Modularity (louvain) or two-level codelength in bits (infomap) of
  /// `partition` on the input graph.
  double objective = 0.0;
  int q_star = 0;
  /// Number of aggregation levels performed.
  int passes = 0;
  std::uint64_t seed = 0;
};

/// Greedy maximization of the alpha-resolution modularity: local moves to
/// the best neighbouring cluster in shuffled order, then aggregation of
/// clusters into weighted super-vertices, until a level makes no move.
GreedyResult louvain(const Graph& g, double alpha, std::uint64_t seed);

/// The same scheme minimizing the two-level map-equation codelength.
GreedyResult infomap_two_level(const Graph& g, std::uint64_t seed);

GreedyResult run_greedy(const Graph& g, GreedyMethod method, double alpha, std::uint64_t seed);

struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

/// Linear-interpolation quantiles of the values.
SummaryStats summarize(std::vector<double> values);

struct GreedySummary {
  GreedyMethod method = GreedyMethod::louvain;
  std::vector<GreedyResult> runs;
  SummaryStats q_star;
  SummaryStats objective;
};

/// `runs` independent runs; run r uses seed derive_seed(seed, r).
GreedySummary greedy_stats(const Graph& g, GreedyMethod method, int runs, std::uint64_t seed, double alpha = 1.0,
                           int jobs = 1);

}  // namespace qstar

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "qstar/criteria.hpp"
#include "qstar/detail/weighted_graph.hpp"
#include "qstar/generators.hpp"
#include "qstar/greedy.hpp"
#include "support/oracles.hpp"

using namespace qstar;
using namespace qstar::testing;

namespace {

// Calls f on every set partition of n vertices (restricted growth strings)
// with at most max_blocks blocks.
void for_each_partition(Index n, int max_blocks, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::function<void(Index, int)> rec = [&](Index i, int used) {
    if (i == n) {
      f(labels);
      return;
    }
    for (int l = 0; l <= std::min(used, max_blocks - 1); ++l) {
      labels[i] = l;
      rec(i + 1, std::max(used, l + 1));
    }
  };
  rec(0, 0);
}

bool same_split(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

std::vector<int> two_clique_labels() {
  std::vector<int> labels(10, 0);
  for (int i = 5; i < 10; ++i) labels[i] = 1;
  return labels;
}

}  // namespace

TEST(Greedy, TwoCliquesExhaustiveModularity) {
  const Graph g = disjoint_cliques(2, 5);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> arg;
  for_each_partition(10, 10, [&](const std::vector<int>& l) {
    const double q = brute_modularity(g, l, 1.0);
    if (q > best + 1e-12) best = q, arg = l;
  });
  EXPECT_TRUE(same_split(arg, two_clique_labels()));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = louvain(g, 1.0, seed);
    EXPECT_EQ(r.q_star, 2);
    EXPECT_TRUE(same_split(r.partition.labels, arg));
    EXPECT_NEAR(r.objective, best, 1e-12);
  }
}

TEST(Greedy, TwoCliquesExhaustiveCodelength) {
  const Graph g = disjoint_cliques(2, 5);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> arg;
  for_each_partition(10, 10, [&](const std::vector<int>& l) {
    const double c = brute_map_equation(g, l);
    if (c < best - 1e-12) best = c, arg = l;
  });
  EXPECT_TRUE(same_split(arg, two_clique_labels()));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = infomap_two_level(g, seed);
    EXPECT_EQ(r.q_star, 2);
    EXPECT_NEAR(r.objective, best, 1e-12);
  }
}

TEST(Greedy, CompleteGraphIsOneModuleUnderCodelength) {
  const Graph g = complete_graph(6);
  double best = std::numeric_limits<double>::infinity();
  int best_blocks = 0;
  for_each_partition(6, 3, [&](const std::vector<int>& l) {
    const double c = brute_map_equation(g, l);
    if (c < best - 1e-12) best = c, best_blocks = *std::max_element(l.begin(), l.end()) + 1;
  });
  EXPECT_EQ(best_blocks, 1);
  const auto r = infomap_two_level(g, 3);
  EXPECT_EQ(r.q_star, 1);
  EXPECT_NEAR(r.objective, best, 1e-12);
  EXPECT_NEAR(r.objective, std::log2(6.0), 1e-12);
}

TEST(Greedy, SingleEdgeDeterministicPerSeed) {
  const Graph g = make_graph(2, {{0, 1}});
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto a = louvain(g, 1.0, seed);
    const auto b = louvain(g, 1.0, seed);
    EXPECT_EQ(a.partition.labels, b.partition.labels);
    EXPECT_EQ(a.q_star, 1);
    EXPECT_EQ(infomap_two_level(g, seed).q_star, 1);
  }
}

TEST(Greedy, ObjectiveMatchesCriteria) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto [g, truth] = generate_sbm(SbmSpec::from_average_degree(400, 4, 6.0, 0.2), seed);
    for (double alpha : {1.0, 0.6}) {
      const auto r = louvain(g, alpha, seed);
      EXPECT_NEAR(r.objective, modularity(g, r.partition, alpha), 1e-9);
      EXPECT_NEAR(r.objective, brute_modularity(g, r.partition.labels, alpha), 1e-9);
    }
    const auto m = infomap_two_level(g, seed);
    EXPECT_NEAR(m.objective, map_equation_mdl(g, m.partition), 1e-9);
    EXPECT_NEAR(m.objective, brute_map_equation(g, m.partition.labels), 1e-9);
  }
}

TEST(Greedy, RetrievesPlantedClustersWhenStrong) {
  const auto [g, truth] = generate_sbm(SbmSpec::from_average_degree(600, 3, 12.0, 0.02), 7);
  EXPECT_GT(permuted_overlap(louvain(g, 1.0, 1).partition.labels, truth.labels, 3), 0.95);
  EXPECT_GT(permuted_overlap(infomap_two_level(g, 1).partition.labels, truth.labels, 3), 0.95);
}

TEST(Aggregation, ObjectivesTelescope) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const Index n = 10 + static_cast<Index>(rng.below(90));
    const Graph g = random_gnp(n, 5.0 / static_cast<double>(n), rng);
    if (g.num_edges() == 0) continue;
    auto wg = detail::WeightedGraph::from_graph(g);
    std::vector<int> unfolded(static_cast<std::size_t>(n));
    std::iota(unfolded.begin(), unfolded.end(), 0);
    for (int level = 0; level < 4; ++level) {
      // Random coarsening of the current nodes.
      const int count = std::max<int>(1, static_cast<int>(wg.size()) / 2);
      std::vector<int> labels(static_cast<std::size_t>(wg.size()));
      for (auto& l : labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(count)));
      const int used = detail::compact_labels(labels);
      std::vector<int> original(static_cast<std::size_t>(n));
      for (Index v = 0; v < n; ++v) original[v] = labels[unfolded[v]];
      EXPECT_NEAR(detail::weighted_modularity(wg, labels, 0.8), brute_modularity(g, original, 0.8), 1e-12);
      EXPECT_NEAR(detail::weighted_codelength(wg, labels), brute_map_equation(g, original), 1e-10);
      wg = detail::aggregate(wg, labels, used);
      unfolded = original;
      EXPECT_NEAR(wg.total_strength, 2.0 * static_cast<double>(g.num_edges()), 1e-12);
    }
  }
}

TEST(Aggregation, LocalMovesOnlyImprove) {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const Graph g = random_gnp(80, 0.06, rng);
    if (g.num_edges() == 0) continue;
    const auto wg = detail::WeightedGraph::from_graph(g);
    std::vector<int> singletons(80);
    std::iota(singletons.begin(), singletons.end(), 0);
    bool moved = false;
    const auto mod = detail::modularity_local_moves(wg, 1.0, rng, moved);
    if (moved) EXPECT_GT(detail::weighted_modularity(wg, mod, 1.0), detail::weighted_modularity(wg, singletons, 1.0));
    const auto code = detail::codelength_local_moves(wg, rng, moved);
    if (moved)
      EXPECT_LT(detail::weighted_codelength(wg, code), detail::weighted_codelength(wg, singletons));
  }
}

TEST(GreedyStats, Bookkeeping) {
  const auto [g, truth] = generate_sbm(SbmSpec::from_average_degree(300, 3, 6.0, 0.3), 2);
  const auto s = greedy_stats(g, GreedyMethod::louvain, 30, 17);
  ASSERT_EQ(s.runs.size(), 30u);
  std::vector<double> q;
  for (std::size_t r = 0; r < s.runs.size(); ++r) {
    EXPECT_EQ(s.runs[r].seed, derive_seed(17, r));
    const auto again = louvain(g, 1.0, s.runs[r].seed);
    EXPECT_EQ(again.partition.labels, s.runs[r].partition.labels);
    q.push_back(s.runs[r].q_star);
  }
  const auto stats = summarize(q);
  EXPECT_DOUBLE_EQ(s.q_star.mean, stats.mean);
  EXPECT_DOUBLE_EQ(s.q_star.max, stats.max);
  const auto parallel = greedy_stats(g, GreedyMethod::louvain, 30, 17, 1.0, 4);
  for (std::size_t r = 0; r < s.runs.size(); ++r)
    EXPECT_EQ(parallel.runs[r].partition.labels, s.runs[r].partition.labels);
}

TEST(GreedyStats, TwoCliquesHaveNoSpread) {
  const Graph g = disjoint_cliques(2, 5);
  for (auto method : {GreedyMethod::louvain, GreedyMethod::infomap}) {
    const auto s = greedy_stats(g, method, 30, 5);
    EXPECT_EQ(s.q_star.std, 0.0);
    EXPECT_EQ(s.q_star.mean, 2.0);
  }
}

TEST(Summarize, Quantiles) {
  const auto s = summarize({4.0, 1.0, 3.0, 2.0, 5.0});
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.median, 3.0);
  EXPECT_DOUBLE_EQ(s.q25, 2.0);
  EXPECT_DOUBLE_EQ(s.q75, 4.0);
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 5.0);
  EXPECT_NEAR(s.std, std::sqrt(2.5), 1e-15);
  const auto four = summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(four.q25, 1.75);
  EXPECT_DOUBLE_EQ(summarize({7.0}).std, 0.0);
}

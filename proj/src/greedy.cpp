#include "qstar/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qstar/criteria.hpp"
#include "qstar/detail/parallel.hpp"
#include "qstar/detail/weighted_graph.hpp"
#include "qstar/errors.hpp"

namespace qstar {
namespace detail {
namespace {

constexpr double kMoveTol = 1e-10;

double plogp(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

// Accumulates the weight from one node to each neighbouring cluster.
class NeighborWeights {
 public:
  explicit NeighborWeights(Index clusters) : weight_(static_cast<std::size_t>(clusters), 0.0) {}

  void collect(const WeightedGraph& wg, Index v, const std::vector<int>& cluster) {
    for (int c : touched_) weight_[c] = 0.0;
    touched_.clear();
    for (const auto& [w, wt] : wg.adj[v]) {
      const int c = cluster[w];
      if (weight_[c] == 0.0) touched_.push_back(c);
      weight_[c] += wt;
    }
  }

  double operator[](int c) const { return weight_[c]; }
  const std::vector<int>& touched() const { return touched_; }

 private:
  std::vector<double> weight_;
  std::vector<int> touched_;
};

std::vector<Index> shuffled_nodes(Index n, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(std::span<Index>(order));
  return order;
}

}  // namespace

WeightedGraph WeightedGraph::from_graph(const Graph& g) {
  WeightedGraph wg;
  const Index n = g.num_vertices();
  wg.adj.resize(static_cast<std::size_t>(n));
  wg.self_loop.assign(static_cast<std::size_t>(n), 0.0);
  wg.strength.resize(static_cast<std::size_t>(n));
  wg.square_degree.resize(static_cast<std::size_t>(n));
  wg.total_strength = 2.0 * static_cast<double>(g.num_edges());
  for (Index v = 0; v < n; ++v) {
    for (Index w : g.neighbors(v)) wg.adj[v].emplace_back(w, 1.0);
    const double d = static_cast<double>(g.degree(v));
    wg.strength[v] = d;
    wg.square_degree[v] = d * d;
    if (wg.total_strength > 0.0) wg.vertex_entropy -= plogp(d / wg.total_strength);
  }
  return wg;
}

WeightedGraph aggregate(const WeightedGraph& wg, const std::vector<int>& labels, int count) {
  WeightedGraph out;
  const auto k = static_cast<std::size_t>(count);
  out.adj.resize(k);
  out.self_loop.assign(k, 0.0);
  out.strength.assign(k, 0.0);
  out.square_degree.assign(k, 0.0);
  out.total_strength = wg.total_strength;
  out.vertex_entropy = wg.vertex_entropy;

  std::vector<std::vector<Index>> members(k);
  for (Index v = 0; v < wg.size(); ++v) members[labels[v]].push_back(v);
  std::vector<double> weight(k, 0.0);
  std::vector<int> touched;
  for (std::size_t c = 0; c < k; ++c) {
    for (Index v : members[c]) {
      out.self_loop[c] += wg.self_loop[v];
      out.strength[c] += wg.strength[v];
      out.square_degree[c] += wg.square_degree[v];
      for (const auto& [w, wt] : wg.adj[v]) {
        const int d = labels[w];
        if (static_cast<std::size_t>(d) == c) {
          out.self_loop[c] += 0.5 * wt;  // seen from both ends
        } else {
          if (weight[d] == 0.0) touched.push_back(d);
          weight[d] += wt;
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int d : touched) {
      out.adj[c].emplace_back(d, weight[d]);
      weight[d] = 0.0;
    }
    touched.clear();
  }
  return out;
}

double weighted_modularity(const WeightedGraph& wg, const std::vector<int>& labels, double alpha) {
  const double two_l = wg.total_strength;
  if (two_l <= 0.0) return 0.0;
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> inside(static_cast<std::size_t>(k), 0.0), mass(inside), square(inside);
  for (Index v = 0; v < wg.size(); ++v) {
    const int c = labels[v];
    inside[c] += wg.self_loop[v];
    for (const auto& [w, wt] : wg.adj[v])
      if (labels[w] == c) inside[c] += 0.5 * wt;
    mass[c] += wg.strength[v];
    square[c] += wg.square_degree[v];
  }
  double total = 0.0;
  for (int c = 0; c < k; ++c) total += inside[c] - alpha * (mass[c] * mass[c] - square[c]) / (2.0 * two_l);
  return total / two_l;
}

double weighted_codelength(const WeightedGraph& wg, const std::vector<int>& labels) {
  const double two_l = wg.total_strength;
  if (two_l <= 0.0) return 0.0;
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> exit(static_cast<std::size_t>(k), 0.0), visit(exit);
  for (Index v = 0; v < wg.size(); ++v) {
    const int c = labels[v];
    visit[c] += wg.strength[v] / two_l;
    for (const auto& [w, wt] : wg.adj[v])
      if (labels[w] != c) exit[c] += wt / two_l;
  }
  double exit_total = 0.0, exit_terms = 0.0, module_terms = 0.0;
  for (int c = 0; c < k; ++c) {
    exit_total += exit[c];
    exit_terms += plogp(exit[c]);
    module_terms += plogp(exit[c] + visit[c]);
  }
  return plogp(exit_total) - 2.0 * exit_terms + wg.vertex_entropy + module_terms;
}

int compact_labels(std::vector<int>& labels) {
  std::vector<int> remap(labels.size(), -1);
  int next = 0;
  for (int& l : labels) {
    if (remap[l] < 0) remap[l] = next++;
    l = remap[l];
  }
  return next;
}

std::vector<int> modularity_local_moves(const WeightedGraph& wg, double alpha, Rng& rng, bool& moved) {
  const Index n = wg.size();
  const double two_l = wg.total_strength;
  std::vector<int> cluster(static_cast<std::size_t>(n));
  std::iota(cluster.begin(), cluster.end(), 0);
  std::vector<double> mass(wg.strength);
  NeighborWeights weights(n);
  moved = false;
  bool improved = two_l > 0.0;
  while (improved) {
    improved = false;
    for (const Index v : shuffled_nodes(n, rng)) {
      const int home = cluster[v];
      const double s = wg.strength[v];
      weights.collect(wg, v, cluster);
      mass[home] -= s;
      // Gain of joining cluster c, up to terms that do not depend on c.
      auto gain = [&](int c) { return weights[c] - alpha * mass[c] * s / two_l; };
      int best = home;
      double best_gain = gain(home);
      for (int c : weights.touched()) {
        if (c != home && gain(c) > best_gain + kMoveTol) {
          best = c;
          best_gain = gain(c);
        }
      }
      mass[best] += s;
      if (best != home) {
        cluster[v] = best;
        improved = moved = true;
      }
    }
  }
  compact_labels(cluster);
  return cluster;
}

std::vector<int> codelength_local_moves(const WeightedGraph& wg, Rng& rng, bool& moved) {
  const Index n = wg.size();
  const double two_l = wg.total_strength;
  std::vector<int> cluster(static_cast<std::size_t>(n));
  std::iota(cluster.begin(), cluster.end(), 0);
  // Exit and visit rates in units of edge weight; divided by 2L on use.
  std::vector<double> exit(static_cast<std::size_t>(n)), visit(wg.strength);
  std::vector<Index> members(static_cast<std::size_t>(n), 1);
  for (Index v = 0; v < n; ++v) exit[v] = wg.strength[v] - 2.0 * wg.self_loop[v];
  std::vector<int> empty;
  NeighborWeights weights(n);
  moved = false;
  if (two_l <= 0.0) return cluster;

  auto term = [&](double x) { return plogp(x / two_l); };
  bool improved = true;
  while (improved) {
    improved = false;
    double exit_total = 0.0;
    for (Index c = 0; c < n; ++c) exit_total += exit[c];
    for (const Index v : shuffled_nodes(n, rng)) {
      const int home = cluster[v];
      const double s = wg.strength[v];
      const double out = s - 2.0 * wg.self_loop[v];
      weights.collect(wg, v, cluster);
      const double new_home_exit = exit[home] - out + 2.0 * weights[home];
      const double new_home_visit = visit[home] - s;
      // Codelength change for moving v from home to c.
      auto delta = [&](int c) {
        const double new_exit = exit[c] + out - 2.0 * weights[c];
        const double new_total = exit_total + (new_home_exit - exit[home]) + (new_exit - exit[c]);
        return (term(new_total) - term(exit_total)) -
               2.0 * (term(new_home_exit) + term(new_exit) - term(exit[home]) - term(exit[c])) +
               (term(new_home_exit + new_home_visit) + term(new_exit + visit[c] + s) -
                term(exit[home] + visit[home]) - term(exit[c] + visit[c]));
      };
      int best = home;
      double best_delta = -kMoveTol;
      for (int c : weights.touched()) {
        if (c == home) continue;
        if (const double d = delta(c); d < best_delta) {
          best = c;
          best_delta = d;
        }
      }
      if (members[home] > 1 && !empty.empty()) {
        const int c = empty.back();
        if (const double d = delta(c); d < best_delta) {
          best = c;
          best_delta = d;
        }
      }
      if (best == home) continue;

      const double new_exit = exit[best] + out - 2.0 * weights[best];
      exit_total += (new_home_exit - exit[home]) + (new_exit - exit[best]);
      if (!empty.empty() && empty.back() == best) empty.pop_back();
      exit[home] = new_home_exit;
      visit[home] = new_home_visit;
      exit[best] = new_exit;
      visit[best] += s;
      if (--members[home] == 0) {
        empty.push_back(home);
        // Clear rounding residue of an emptied module.
        exit[home] = visit[home] = 0.0;
      }
      ++members[best];
      cluster[v] = best;
      improved = moved = true;
    }
  }
  compact_labels(cluster);
  return cluster;
}

}  // namespace detail

namespace {

template <typename LocalMoves, typename Objective>
GreedyResult run_levels(const Graph& g, std::uint64_t seed, LocalMoves&& local_moves, Objective&& objective) {
  if (g.num_vertices() == 0) throw DomainError("greedy methods need a nonempty graph");
  GreedyResult result;
  result.seed = seed;
  Rng rng(seed);
  detail::WeightedGraph wg = detail::WeightedGraph::from_graph(g);
  std::vector<int> labels(static_cast<std::size_t>(g.num_vertices()));
  std::iota(labels.begin(), labels.end(), 0);
  while (wg.size() > 1) {
    bool moved = false;
    const std::vector<int> level = local_moves(wg, rng, moved);
    if (!moved) break;
    const int count = *std::max_element(level.begin(), level.end()) + 1;
    for (int& l : labels) l = level[l];
    wg = detail::aggregate(wg, level, count);
    ++result.passes;
  }
  result.partition.q = detail::compact_labels(labels);
  result.partition.labels = std::move(labels);
  result.q_star = result.partition.q;
  result.objective = objective(result.partition);
  return result;
}

}  // namespace

std::string to_string(GreedyMethod method) { return method == GreedyMethod::louvain ? "louvain" : "infomap"; }

GreedyResult louvain(const Graph& g, double alpha, std::uint64_t seed) {
  return run_levels(
      g, seed,
      [&](const detail::WeightedGraph& wg, Rng& rng, bool& moved) {
        return detail::modularity_local_moves(wg, alpha, rng, moved);
      },
      [&](const Partition& p) { return modularity(g, p, alpha); });
}

GreedyResult infomap_two_level(const Graph& g, std::uint64_t seed) {
  return run_levels(
      g, seed,
      [&](const detail::WeightedGraph& wg, Rng& rng, bool& moved) {
        return detail::codelength_local_moves(wg, rng, moved);
      },
      [&](const Partition& p) { return map_equation_mdl(g, p); });
}

GreedyResult run_greedy(const Graph& g, GreedyMethod method, double alpha, std::uint64_t seed) {
  return method == GreedyMethod::louvain ? louvain(g, alpha, seed) : infomap_two_level(g, seed);
}

SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  auto quantile = [&](double p) {
    const double pos = p * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.q25 = quantile(0.25);
  s.median = quantile(0.5);
  s.q75 = quantile(0.75);
  s.max = values.back();
  return s;
}

GreedySummary greedy_stats(const Graph& g, GreedyMethod method, int runs, std::uint64_t seed, double alpha, int jobs) {
  if (runs < 1) throw DomainError("greedy_stats needs at least one run");
  GreedySummary summary;
  summary.method = method;
  summary.runs.resize(static_cast<std::size_t>(runs));
  detail::parallel_for(runs, jobs, [&](Index r) {
    summary.runs[r] = run_greedy(g, method, alpha, derive_seed(seed, static_cast<std::uint64_t>(r)));
  });
  std::vector<double> q, obj;
  for (const auto& r : summary.runs) {
    q.push_back(r.q_star);
    obj.push_back(r.objective);
  }
  summary.q_star = summarize(std::move(q));
  summary.objective = summarize(std::move(obj));
  return summary;
}

}  // namespace qstar

#include "qstar/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "qstar/errors.hpp"

namespace qstar {

Graph Graph::from_edges(Index n, std::span<const std::pair<Index, Index>> edges) {
  if (n < 0) throw std::invalid_argument("negative vertex count");
  std::vector<Edge> clean;
  clean.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw std::invalid_argument("edge endpoint out of range");
    if (a == b) continue;
    clean.push_back({std::min(a, b), std::max(a, b)});
  }
  std::sort(clean.begin(), clean.end(),
            [](const Edge& x, const Edge& y) { return x.u != y.u ? x.u < y.u : x.v < y.v; });
  clean.erase(std::unique(clean.begin(), clean.end()), clean.end());

  Graph g;
  g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& e : clean) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());

  const auto arcs = static_cast<std::size_t>(2 * clean.size());
  g.targets_.resize(arcs);
  g.sources_.resize(arcs);
  g.reverse_.resize(arcs);
  g.edge_arcs_.resize(clean.size());
  std::vector<Index> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  // Lexicographic edge order fills every row in ascending target order:
  // row w first receives its smaller neighbours (as v of edges (u, w), u
  // ascending) and then its larger ones (as u of edges (w, v), v ascending).
  for (std::size_t e = 0; e < clean.size(); ++e) {
    const auto [u, v] = clean[e];
    const Index a = fill[u]++;
    const Index b = fill[v]++;
    g.targets_[a] = v;
    g.sources_[a] = u;
    g.targets_[b] = u;
    g.sources_[b] = v;
    g.reverse_[a] = b;
    g.reverse_[b] = a;
    g.edge_arcs_[e] = a;
  }
  g.edges_ = std::move(clean);
  g.original_ids_.resize(static_cast<std::size_t>(n));
  std::iota(g.original_ids_.begin(), g.original_ids_.end(), std::int64_t{0});
  return g;
}

Eigen::VectorXd Graph::degree_vector() const {
  Eigen::VectorXd d(num_vertices());
  for (Index v = 0; v < num_vertices(); ++v) d[v] = static_cast<double>(degree(v));
  return d;
}

Eigen::SparseMatrix<double> Graph::adjacency_matrix() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(targets_.size());
  for (Index a = 0; a < num_arcs(); ++a) triplets.emplace_back(sources_[a], targets_[a], 1.0);
  Eigen::SparseMatrix<double> adj(num_vertices(), num_vertices());
  adj.setFromTriplets(triplets.begin(), triplets.end());
  return adj;
}

void Graph::set_original_ids(std::vector<std::int64_t> ids) {
  if (static_cast<Index>(ids.size()) != num_vertices())
    throw std::invalid_argument("original id map has wrong length");
  original_ids_ = std::move(ids);
}

int Partition::effective_count() const {
  std::vector<char> used(static_cast<std::size_t>(q), 0);
  for (int l : labels) used[static_cast<std::size_t>(l)] = 1;
  return static_cast<int>(std::count(used.begin(), used.end(), 1));
}

std::vector<Index> Partition::sizes() const {
  std::vector<Index> s(static_cast<std::size_t>(q), 0);
  for (int l : labels) ++s[static_cast<std::size_t>(l)];
  return s;
}

void Partition::validate() const {
  for (int l : labels)
    if (l < 0 || l >= q) throw std::invalid_argument("partition label outside [0, q)");
}

namespace {

bool parse_id(std::string_view token, std::int64_t& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && out >= 0;
}

}  // namespace

Graph parse_edge_list(std::istream& in) {
  std::unordered_map<std::int64_t, Index> compact;
  std::vector<std::int64_t> original;
  std::vector<std::pair<Index, Index>> edges;
  auto intern = [&](std::int64_t id) {
    auto [it, inserted] = compact.try_emplace(id, static_cast<Index>(original.size()));
    if (inserted) original.push_back(id);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string a, b;
    if (!(fields >> a)) continue;
    std::int64_t ia = 0, ib = 0;
    if (!(fields >> b) || !parse_id(a, ia) || !parse_id(b, ib)) {
      throw ParseError("edge list line " + std::to_string(line_no) +
                       ": expected two non-negative integer vertex ids");
    }
    const Index ca = intern(ia);
    const Index cb = intern(ib);
    edges.emplace_back(ca, cb);
  }
  if (in.bad()) throw IoError("read failure while parsing edge list");

  Graph g = Graph::from_edges(static_cast<Index>(original.size()), edges);
  if (g.num_edges() == 0) throw ParseError("edge list contains no edges");
  g.set_original_ids(std::move(original));
  return g;
}

Graph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_edge_list(in);
}

void write_edge_list(const Graph& g, std::ostream& out) {
  // Emits, for k = 0, 1, ..., every edge whose larger endpoint is k. Vertex k
  // is introduced either by an edge to an already-seen neighbour or by a
  // self-loop line, so first-appearance order equals the current numbering.
  for (Index k = 0; k < g.num_vertices(); ++k) {
    const auto nbrs = g.neighbors(k);
    const auto smaller = std::lower_bound(nbrs.begin(), nbrs.end(), k);
    if (smaller == nbrs.begin()) out << k << ' ' << k << '\n';
    for (auto it = nbrs.begin(); it != smaller; ++it) out << *it << ' ' << k << '\n';
  }
  if (!out) throw IoError("write failure while emitting edge list");
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_edge_list(g, out);
}

std::vector<Index> component_labels(const Graph& g) {
  const Index n = g.num_vertices();
  std::vector<Index> label(static_cast<std::size_t>(n), -1);
  std::vector<Index> stack;
  Index next = 0;
  for (Index s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index w : g.neighbors(v)) {
        if (label[w] < 0) {
          label[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return label;
}

Graph largest_component(const Graph& g) {
  const Index n = g.num_vertices();
  if (n == 0) return g;
  const auto label = component_labels(g);
  const Index count = *std::max_element(label.begin(), label.end()) + 1;
  std::vector<Index> size(static_cast<std::size_t>(count), 0);
  std::vector<std::int64_t> min_id(static_cast<std::size_t>(count), INT64_MAX);
  const auto& ids = g.original_ids();
  for (Index v = 0; v < n; ++v) {
    ++size[label[v]];
    min_id[label[v]] = std::min(min_id[label[v]], ids[v]);
  }
  Index best = 0;
  for (Index c = 1; c < count; ++c) {
    if (size[c] > size[best] || (size[c] == size[best] && min_id[c] < min_id[best])) best = c;
  }

  std::vector<Index> remap(static_cast<std::size_t>(n), -1);
  std::vector<std::int64_t> kept_ids;
  for (Index v = 0; v < n; ++v) {
    if (label[v] == best) {
      remap[v] = static_cast<Index>(kept_ids.size());
      kept_ids.push_back(ids[v]);
    }
  }
  std::vector<std::pair<Index, Index>> edges;
  for (const auto& e : g.edges()) {
    if (remap[e.u] >= 0 && remap[e.v] >= 0) edges.emplace_back(remap[e.u], remap[e.v]);
  }
  Graph sub = Graph::from_edges(static_cast<Index>(kept_ids.size()), edges);
  sub.set_original_ids(std::move(kept_ids));
  return sub;
}

}  // namespace qstar

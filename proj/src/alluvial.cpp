#include "qstar/alluvial.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qstar/errors.hpp"

namespace qstar {
namespace {

std::string map_name(int q) { return "map_q" + std::to_string(q) + ".txt"; }

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_layer(const AlluvialLayer& layer, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "N " << layer.labels.size() << '\n';
  out << "q " << layer.q << '\n';
  out << "clusters " << layer.cluster_sizes.size() << '\n';
  for (std::size_t c = 0; c < layer.cluster_sizes.size(); ++c) out << c << ' ' << layer.cluster_sizes[c] << '\n';
  out << "vertices " << layer.labels.size() << '\n';
  for (std::size_t v = 0; v < layer.labels.size(); ++v)
    out << v << ' ' << layer.labels[v] << ' ' << format_double(layer.max_marginal[v]) << ' '
        << int(layer.significant[v]) << '\n';
  if (!out) throw IoError("write failure on " + path.string());
}

AlluvialLayer read_layer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  auto fail = [&](const std::string& what) { throw ParseError(path.string() + ": " + what); };
  auto expect = [&](const char* key) {
    std::string word;
    long long value = 0;
    if (!(in >> word >> value) || word != key || value < 0) fail(std::string("expected '") + key + " <count>'");
    return value;
  };
  AlluvialLayer layer;
  const auto n = expect("N");
  layer.q = static_cast<int>(expect("q"));
  const auto k = expect("clusters");
  layer.cluster_sizes.resize(static_cast<std::size_t>(k));
  for (long long c = 0; c < k; ++c) {
    long long id = 0;
    if (!(in >> id >> layer.cluster_sizes[c]) || id != c) fail("bad cluster line");
  }
  if (expect("vertices") != n) fail("vertex count mismatch");
  layer.labels.resize(static_cast<std::size_t>(n));
  layer.max_marginal.resize(static_cast<std::size_t>(n));
  layer.significant.resize(static_cast<std::size_t>(n));
  for (long long v = 0; v < n; ++v) {
    long long id = 0;
    int sig = 0;
    if (!(in >> id >> layer.labels[v] >> layer.max_marginal[v] >> sig) || id != v) fail("bad vertex line");
    layer.significant[v] = static_cast<char>(sig != 0);
  }
  return layer;
}

}  // namespace

AlluvialLayer make_layer(const Marginals& marginals) {
  const int q = marginals.q();
  const Index n = marginals.psi.cols();
  AlluvialLayer layer;
  layer.q = q;
  std::vector<int> channel(static_cast<std::size_t>(n));
  std::vector<Index> size(static_cast<std::size_t>(q), 0);
  for (Index v = 0; v < n; ++v) {
    Index best = 0;
    for (Index s = 1; s < q; ++s)
      if (marginals.psi(s, v) > marginals.psi(best, v)) best = s;
    channel[v] = static_cast<int>(best);
    ++size[best];
    layer.max_marginal.push_back(marginals.psi(best, v));
    layer.significant.push_back(static_cast<char>(is_significant(marginals.psi(best, v))));
  }
  std::vector<int> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return size[a] > size[b]; });
  std::vector<int> rank(static_cast<std::size_t>(q), -1);
  for (int r = 0; r < q; ++r) {
    if (size[order[r]] == 0) break;
    rank[order[r]] = r;
    layer.cluster_sizes.push_back(size[order[r]]);
  }
  for (int c : channel) layer.labels.push_back(rank[c]);
  return layer;
}

AlluvialLink link_layers(const AlluvialLayer& from, const AlluvialLayer& to) {
  if (from.labels.size() != to.labels.size()) throw DomainError("layers cover different vertex sets");
  const std::size_t ka = from.cluster_sizes.size();
  const std::size_t kb = to.cluster_sizes.size();
  std::vector<Index> overlap(ka * kb, 0), significant(ka * kb, 0);
  for (std::size_t v = 0; v < from.labels.size(); ++v) {
    const std::size_t cell = static_cast<std::size_t>(from.labels[v]) * kb + static_cast<std::size_t>(to.labels[v]);
    ++overlap[cell];
    if (from.significant[v] && to.significant[v]) ++significant[cell];
  }

  AlluvialLink link;
  link.q_from = from.q;
  link.q_to = to.q;
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < ka; ++a) {
    for (std::size_t b = 0; b < kb; ++b) {
      const Index size = overlap[a * kb + b];
      if (size == 0) continue;
      link.flows.push_back({static_cast<int>(a), static_cast<int>(b), size, significant[a * kb + b]});
      pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& x, const auto& y) {
    return overlap[x.first * kb + x.second] > overlap[y.first * kb + y.second];
  });
  std::vector<char> used_a(ka, 0), used_b(kb, 0);
  for (const auto& [a, b] : pairs) {
    if (used_a[a] || used_b[b]) continue;
    used_a[a] = used_b[b] = 1;
    link.matching.emplace_back(a, b);
  }
  std::sort(link.matching.begin(), link.matching.end());
  link.parents.assign(kb, -1);
  for (std::size_t b = 0; b < kb; ++b) {
    Index best = 0;
    for (std::size_t a = 0; a < ka; ++a) {
      if (overlap[a * kb + b] > best) {
        best = overlap[a * kb + b];
        link.parents[b] = static_cast<int>(a);
      }
    }
  }
  return link;
}

AlluvialBundle build_bundle(const std::vector<Marginals>& marginals) {
  AlluvialBundle bundle;
  for (const auto& m : marginals) {
    if (!bundle.layers.empty() && m.q() <= bundle.layers.back().q)
      throw DomainError("alluvial layers need strictly increasing q");
    bundle.layers.push_back(make_layer(m));
  }
  if (!bundle.layers.empty()) bundle.n = static_cast<Index>(bundle.layers.front().labels.size());
  for (std::size_t i = 0; i + 1 < bundle.layers.size(); ++i)
    bundle.links.push_back(link_layers(bundle.layers[i], bundle.layers[i + 1]));
  return bundle;
}

AlluvialBundle build_bundle(const SweepReport& report, const std::vector<int>& q_list) {
  std::vector<int> qs = q_list;
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
  std::vector<Marginals> marginals;
  for (int q : qs) {
    auto it = std::find_if(report.rows.begin(), report.rows.end(),
                           [&](const SweepRow& r) { return r.record.q_input == q && r.marginals.has_value(); });
    if (it == report.rows.end()) throw InvalidStateError("no stored marginals for q = " + std::to_string(q));
    marginals.push_back(*it->marginals);
  }
  return build_bundle(marginals);
}

void export_alluvial(const AlluvialBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& layer : bundle.layers) write_layer(layer, dir / map_name(layer.q));

  nlohmann::json links = nlohmann::json::array();
  for (const auto& link : bundle.links) {
    nlohmann::json flows = nlohmann::json::array();
    for (const auto& f : link.flows)
      flows.push_back({{"from_cluster", f.from_cluster},
                       {"to_cluster", f.to_cluster},
                       {"size", f.size},
                       {"significant_size", f.significant_size}});
    links.push_back({{"q_from", link.q_from},
                     {"q_to", link.q_to},
                     {"flows", flows},
                     {"matching", link.matching},
                     {"parents", link.parents}});
  }
  std::ofstream out(dir / "flows.json");
  if (!out) throw IoError("cannot write " + (dir / "flows.json").string());
  out << links.dump(2) << '\n';
  if (!out) throw IoError("write failure on " + (dir / "flows.json").string());
}

AlluvialBundle load_alluvial(const std::filesystem::path& dir) {
  AlluvialBundle bundle;
  const std::regex name(R"(map_q(\d+)\.txt)");
  std::vector<std::pair<int, std::filesystem::path>> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    std::smatch m;
    const std::string file = entry.path().filename().string();
    if (std::regex_match(file, m, name)) files.emplace_back(std::stoi(m[1].str()), entry.path());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  for (const auto& [q, path] : files) bundle.layers.push_back(read_layer(path));
  if (!bundle.layers.empty()) bundle.n = static_cast<Index>(bundle.layers.front().labels.size());

  std::ifstream in(dir / "flows.json");
  if (!in) throw IoError("cannot open " + (dir / "flows.json").string());
  nlohmann::json links;
  try {
    in >> links;
    for (const auto& j : links) {
      AlluvialLink link;
      link.q_from = j.at("q_from").get<int>();
      link.q_to = j.at("q_to").get<int>();
      for (const auto& f : j.at("flows"))
        link.flows.push_back({f.at("from_cluster").get<int>(), f.at("to_cluster").get<int>(),
                              f.at("size").get<Index>(), f.at("significant_size").get<Index>()});
      link.matching = j.at("matching").get<std::vector<std::pair<int, int>>>();
      link.parents = j.at("parents").get<std::vector<int>>();
      bundle.links.push_back(std::move(link));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("flows.json: " + std::string(e.what()));
  }
  return bundle;
}

}  // namespace qstar

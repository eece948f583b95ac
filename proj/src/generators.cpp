#include "qstar/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qstar/errors.hpp"

namespace qstar {
namespace {

std::vector<Index> split_sizes(Index n, int q, const std::vector<Index>& sizes) {
  if (!sizes.empty()) return sizes;
  if (q < 1) throw DomainError("q_planted must be at least 1");
  std::vector<Index> out(static_cast<std::size_t>(q), n / q);
  for (Index r = 0; r < n % q; ++r) ++out[r];
  return out;
}

void check_sizes(Index n, int q, const std::vector<Index>& sizes) {
  if (q < 1) throw DomainError("q_planted must be at least 1");
  if (static_cast<int>(sizes.size()) != q) throw DomainError("need one size per planted cluster");
  if (std::any_of(sizes.begin(), sizes.end(), [](Index s) { return s < 0; }))
    throw DomainError("cluster sizes must be non-negative");
  if (std::accumulate(sizes.begin(), sizes.end(), Index{0}) != n) throw DomainError("cluster sizes must sum to n");
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

// Calls emit(k) for each k in [0, total) independently with probability p,
// skipping ahead geometrically between successes.
template <typename Emit>
void bernoulli_indices(double p, Index total, Rng& rng, Emit&& emit) {
  if (p <= 0.0 || total <= 0) return;
  if (p >= 1.0) {
    for (Index k = 0; k < total; ++k) emit(k);
    return;
  }
  const double log_miss = std::log1p(-p);
  Index k = -1;
  while (true) {
    const double skip = std::floor(std::log1p(-rng.uniform()) / log_miss);
    if (skip >= static_cast<double>(total - k - 1)) break;
    k += static_cast<Index>(skip) + 1;
    emit(k);
  }
}

}  // namespace

SbmSpec SbmSpec::from_average_degree(Index n, int q, double c, double eps) {
  if (n < 2 || q < 1) throw DomainError("need n >= 2 and q >= 1");
  const double nn = static_cast<double>(n);
  const double denom = (nn / q - 1.0) + eps * nn * (q - 1) / q;
  SbmSpec spec;
  spec.n = n;
  spec.q_planted = q;
  spec.omega_in = c / denom;
  spec.omega_out = eps * spec.omega_in;
  return spec;
}

std::vector<Index> SbmSpec::resolved_sizes() const { return split_sizes(n, q_planted, sizes); }

void SbmSpec::validate() const {
  check_sizes(n, q_planted, resolved_sizes());
  check_probability(omega_in, "omega_in");
  check_probability(omega_out, "omega_out");
}

DcSbmSpec DcSbmSpec::with_expected_degrees(std::vector<double> propensities, int q, double eps) {
  DcSbmSpec spec;
  spec.n = static_cast<Index>(propensities.size());
  spec.q_planted = q;
  const double mass = std::accumulate(propensities.begin(), propensities.end(), 0.0);
  spec.propensities = std::move(propensities);
  if (mass <= 0.0) return spec;
  spec.omega_in = q / (mass * (1.0 + eps * (q - 1)));
  spec.omega_out = eps * spec.omega_in;
  return spec;
}

std::vector<Index> DcSbmSpec::resolved_sizes() const { return split_sizes(n, q_planted, sizes); }

void DcSbmSpec::validate() const {
  check_sizes(n, q_planted, resolved_sizes());
  if (static_cast<Index>(propensities.size()) != n) throw DomainError("need one propensity per vertex");
  for (double t : propensities)
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("propensities must be finite and non-negative");
  if (!(omega_in >= 0.0) || !(omega_out >= 0.0)) throw DomainError("affinities must be non-negative");
}

std::vector<double> power_law_propensities(Index n, double exponent, double t_min, double t_max, Rng& rng) {
  if (!(t_min > 0.0 && t_max >= t_min)) throw DomainError("need 0 < t_min <= t_max");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& t : out) {
    const double u = rng.uniform();
    if (std::abs(exponent - 1.0) < 1e-12) {
      t = t_min * std::pow(t_max / t_min, u);
    } else {
      const double a = std::pow(t_min, 1.0 - exponent);
      const double b = std::pow(t_max, 1.0 - exponent);
      t = std::pow(a + u * (b - a), 1.0 / (1.0 - exponent));
    }
  }
  return out;
}

Partition planted_partition(const std::vector<Index>& sizes) {
  Partition p;
  p.q = static_cast<int>(sizes.size());
  for (std::size_t c = 0; c < sizes.size(); ++c) p.labels.insert(p.labels.end(), sizes[c], static_cast<int>(c));
  return p;
}

std::pair<Graph, Partition> generate_sbm(const SbmSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto sizes = spec.resolved_sizes();
  std::vector<Index> start(sizes.size() + 1, 0);
  std::partial_sum(sizes.begin(), sizes.end(), start.begin() + 1);

  Rng rng(seed);
  std::vector<std::pair<Index, Index>> edges;
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    const Index s = sizes[a];
    // Pairs i < j inside block a, enumerated row by row.
    Index row = 0, row_first = 0;
    bernoulli_indices(spec.omega_in, s * (s - 1) / 2, rng, [&](Index k) {
      while (k >= row_first + (s - 1 - row)) {
        row_first += s - 1 - row;
        ++row;
      }
      edges.emplace_back(start[a] + row, start[a] + row + 1 + (k - row_first));
    });
    for (std::size_t b = a + 1; b < sizes.size(); ++b) {
      const Index sb = sizes[b];
      bernoulli_indices(spec.omega_out, s * sb, rng, [&](Index k) {
        edges.emplace_back(start[a] + k / sb, start[b] + k % sb);
      });
    }
  }
  return {Graph::from_edges(spec.n, edges), planted_partition(sizes)};
}

std::pair<Graph, Partition> generate_dcsbm(const DcSbmSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto sizes = spec.resolved_sizes();
  const Partition planted = planted_partition(sizes);
  Rng rng(seed);
  std::vector<std::pair<Index, Index>> edges;
  const auto& t = spec.propensities;
  for (Index i = 0; i < spec.n; ++i) {
    for (Index j = i + 1; j < spec.n; ++j) {
      const double w = planted.labels[i] == planted.labels[j] ? spec.omega_in : spec.omega_out;
      const double p = std::min(1.0, t[i] * w * t[j]);
      if (p <= 0.0) continue;
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  return {Graph::from_edges(spec.n, edges), planted};
}

double expected_edge_count(const SbmSpec& spec) {
  const auto sizes = spec.resolved_sizes();
  double total = 0.0;
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    const double s = static_cast<double>(sizes[a]);
    total += spec.omega_in * s * (s - 1.0) / 2.0;
    for (std::size_t b = a + 1; b < sizes.size(); ++b) total += spec.omega_out * s * static_cast<double>(sizes[b]);
  }
  return total;
}

double expected_edge_count(const DcSbmSpec& spec) {
  const Partition planted = planted_partition(spec.resolved_sizes());
  const auto& t = spec.propensities;
  double total = 0.0;
  for (Index i = 0; i < spec.n; ++i) {
    for (Index j = i + 1; j < spec.n; ++j) {
      const double w = planted.labels[i] == planted.labels[j] ? spec.omega_in : spec.omega_out;
      total += std::min(1.0, t[i] * w * t[j]);
    }
  }
  return total;
}

}  // namespace qstar

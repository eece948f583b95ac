#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qstar/graph.hpp"
#include "qstar/rng.hpp"

namespace qstar {

/// Planted-partition standard SBM with two connection probabilities.
struct SbmSpec {
  Index n = 0;
  int q_planted = 1;
  std::vector<Index> sizes;  // empty means equal sizes
  double omega_in = 0.0;
  double omega_out = 0.0;

  /// Probabilities giving expected average degree c at ratio
  /// eps = omega_out / omega_in, for equal cluster sizes:
  ///   c = omega_in (n/q - 1) + omega_out n (q - 1) / q.
  static SbmSpec from_average_degree(Index n, int q, double c, double eps);

  /// Sizes as used by the generator (equal split when `sizes` is empty,
  /// remainder spread over the first clusters).
  std::vector<Index> resolved_sizes() const;
  void validate() const;
};

/// Degree-corrected SBM; the pair (i, j) is connected with probability
/// min(1, t_i * omega * t_j) where t are the propensities.
struct DcSbmSpec {
  Index n = 0;
  int q_planted = 1;
  std::vector<Index> sizes;
  std::vector<double> propensities;  // length n
  double omega_in = 0.0;
  double omega_out = 0.0;

  /// Affinities for which the expected degree of vertex i is roughly t_i when
  /// the planted clusters have equal propensity mass.
  static DcSbmSpec with_expected_degrees(std::vector<double> propensities, int q, double eps);

  std::vector<Index> resolved_sizes() const;
  void validate() const;
};

/// Power-law propensities p(t) ~ t^-exponent on [t_min, t_max] by inversion.
std::vector<double> power_law_propensities(Index n, double exponent, double t_min, double t_max, Rng& rng);

/// Planted labels: consecutive blocks of the given sizes.
Partition planted_partition(const std::vector<Index>& sizes);

std::pair<Graph, Partition> generate_sbm(const SbmSpec& spec, std::uint64_t seed);
std::pair<Graph, Partition> generate_dcsbm(const DcSbmSpec& spec, std::uint64_t seed);

/// Sum of pair probabilities, the expected edge count of either generator.
double expected_edge_count(const SbmSpec& spec);
double expected_edge_count(const DcSbmSpec& spec);

}  // namespace qstar

#pragma once

#include "qstar/graph.hpp"

namespace qstar {

/// Restricted affinity of the degree-corrected block model: omega_in for
/// pairs in the same cluster, omega_out otherwise.
///
/// The inverse temperature and resolution are derived quantities,
///   beta  = log(omega_in / omega_out),
///   alpha = 2L (omega_in - omega_out) / beta,
/// so that alpha * beta / 2L equals omega_in - omega_out.
struct ModelParams {
  double omega_in = 0.0;
  double omega_out = 0.0;

  double beta() const;
  /// Resolution parameter for a graph with `num_edges` edges. At beta == 0
  /// the continuous limit 2L * omega_out is returned.
  double alpha(Index num_edges) const;
  /// omega_in - omega_out, i.e. alpha * beta / 2L.
  double coupling() const { return omega_in - omega_out; }

  static ModelParams from_alpha_beta(double alpha, double beta, Index num_edges);

  /// Throws DomainError unless both affinities are finite and positive.
  void validate() const;
};

/// Paramagnetic / spin-glass boundary log(q / (sqrt(c) - 1) + 1) for the
/// equal-size block model with average degree c. Requires c > 1.
double beta_star(int q, double c);

/// Lower estimate log(q / (c - 1) + 1) below which inference falls into the
/// paramagnetic phase. Requires c > 1.
double beta_zero(int q, double c);

}  // namespace qstar

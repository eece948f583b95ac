#pragma once

#include <Eigen/Core>

#include "qstar/bp.hpp"
#include "qstar/graph.hpp"
#include "qstar/model.hpp"

namespace qstar {

/// Per-edge quantities shared by the prediction errors, indexed like
/// Graph::edges().
struct PairStats {
  Eigen::VectorXd overlap;  // s_ij = sum_s psi^{i->j}_s psi^{j->i}_s
  Eigen::VectorXd z;        // Z^ij = d_i d_j [(omega_in - omega_out) s_ij + omega_out]
};

PairStats pair_stats(const Graph& g, const Messages& messages, const ModelParams& params);

/// Bethe estimate of log Z,
///   sum_i log Z^i - sum_E log Z^ij - sum_{not E} log Z~^ij,
/// with the non-edge part summed in closed form through theta. Defined for
/// any beta, including 0.
double bethe_log_partition(const Graph& g, const Messages& messages, const Marginals& marginals,
                           const ModelParams& params);

/// -bethe_log_partition / (beta N). Throws DomainError when beta == 0.
double bethe_free_energy(const Graph& g, const Messages& messages, const Marginals& marginals,
                         const ModelParams& params);

/// Argmax of each marginal, ties to the lowest index; q is the row count.
Partition hard_partition(const Marginals& marginals);

/// Q = (1/2L) sum_{i<j} delta(s_i, s_j) [A_ij - alpha d_i d_j / 2L], in
/// O(N + L + q) from per-cluster edge counts and degree sums.
double modularity(const Graph& g, const Partition& partition, double alpha);

double retrieval_modularity(const Graph& g, const Marginals& marginals, double alpha);

/// Two-level map-equation codelength in bits for the degree-proportional
/// random walk.
double map_equation_mdl(const Graph& g, const Partition& partition);

/// 1 - (1/L) sum_E log Z^ij. Throws InvalidStateError if some Z^ij <= 0.
double e_bayes(const Graph& g, const PairStats& stats);

/// 1 - (1/L) sum_E sum_{s s'} psi^{i->j}_s psi^{j->i}_s' log(d_i omega_ss' d_j).
double e_gibbs(const Graph& g, const Messages& messages, const ModelParams& params);

/// e_gibbs with every cavity message replaced by its argmax delta.
double e_map(const Graph& g, const Messages& messages, const ModelParams& params);

/// e_gibbs reweighted by the full-data pair posterior
/// psi_s d_i omega_ss' d_j psi_s' / Z^ij.
double e_training(const Graph& g, const Messages& messages, const PairStats& stats, const ModelParams& params);

struct CriteriaRecord {
  int q_input = 0;
  int q_effective = 0;
  double bethe_f = 0.0;
  double modularity = 0.0;
  double mdl_two_level = 0.0;
  double e_bayes = 0.0;
  double e_gibbs = 0.0;
  double e_map = 0.0;
  double e_training = 0.0;
  double omega_in = 0.0;
  double omega_out = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  bool factorized = false;
  bool converged = false;
};

/// Evaluates every criterion on a fitted state. The modularity column uses
/// resolution `modularity_alpha` (1 gives the standard definition).
CriteriaRecord evaluate_criteria(const Graph& g, const EmResult& fit, double modularity_alpha = 1.0);

}  // namespace qstar

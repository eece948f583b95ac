#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "qstar/graph.hpp"
#include "qstar/model.hpp"
#include "qstar/rng.hpp"

namespace qstar {

/// Cavity messages, one q-vector per arc: column a holds the distribution
/// psi^{i->j} for the arc a = i->j of the graph.
struct Messages {
  Eigen::MatrixXd psi;  // q x 2L

  int q() const { return static_cast<int>(psi.rows()); }
};

/// Vertex marginals (q x N) and the degree-weighted field
/// theta_s = sum_l d_l psi^l_s.
struct Marginals {
  Eigen::MatrixXd psi;
  Eigen::VectorXd theta;

  int q() const { return static_cast<int>(psi.rows()); }
};

struct BpState {
  Messages messages;
  Marginals marginals;

  int q() const { return messages.q(); }
};

/// All messages and marginals exactly 1/q.
BpState uniform_state(const Graph& g, int q);

/// Messages proportional to 1 + noise * (2u - 1) with u uniform on [0, 1),
/// marginals derived from them.
BpState random_state(const Graph& g, int q, double noise, Rng& rng);

struct SweepOptions {
  double damping = 0.0;
  /// When false the field theta is held at its current value during the
  /// sweep instead of following the marginals.
  bool refresh_field = true;
};

/// One asynchronous pass over all arcs in an order shuffled by `rng`.
/// Each update sets
///   psi^{i->j}_s  ~  exp(-(omega_in - omega_out) d_i theta_s)
///                    * prod_{k in di \ j} [1 + psi^{k->i}_s (e^beta - 1)],
/// refreshes the marginal of j and, with refresh_field, adjusts theta by the
/// change in d_j psi^j. Products are accumulated as sums of logarithms.
/// Returns the largest absolute change of any message entry.
/// Throws NumericalError if a message becomes non-finite.
double bp_sweep(const Graph& g, const ModelParams& params, BpState& state, const SweepOptions& options, Rng& rng);

/// Full marginals for the given messages with theta solved self-consistently
/// by fixed-point iteration, started from `theta_start` (uniform 2L/q when
/// absent).
Marginals compute_marginals(const Graph& g, const ModelParams& params, const Messages& messages,
                            const std::optional<Eigen::VectorXd>& theta_start = std::nullopt);

/// Closed-form parameter update from a BP state,
///   omega_in  = 2 sum_E T_ij / sum_s theta_s^2,
///   omega_out = 2 (L - sum_E T_ij) / ((2L)^2 - sum_s theta_s^2),
/// with T_ij = omega_in s_ij / ((omega_in - omega_out) s_ij + omega_out) and
/// s_ij the overlap of the two cavity messages on edge ij. For q == 1 both
/// affinities equal 1/2L. Throws NumericalError when a denominator is not
/// positive. Vanishing affinities are floored at a tiny positive value.
ModelParams m_step(const Graph& g, const Messages& messages, const Marginals& marginals, const ModelParams& params);

struct EmOptions {
  int restarts = 5;
  int max_sweeps = 500;
  int max_em_iterations = 100;
  double message_tol = 1e-6;
  double param_tol = 1e-5;
  double factorized_tol = 1e-3;
  /// EM gives up (converged = false) after this many consecutive E-steps
  /// that exhaust max_sweeps; overfitted q often never settles.
  int max_unsettled_e_steps = 2;
  /// An E-step also ends unsettled once this many sweeps pass without a new
  /// smallest residual (0 disables the check).
  int max_stalled_sweeps = 100;
  double init_noise = 0.1;
  double damping = 0.0;
  /// Fix alpha = 1 and beta = beta*(q, c) instead of learning them.
  bool frozen_params = false;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct EmResult {
  BpState state;
  ModelParams params;
  bool converged = false;
  bool factorized = false;
  int sweeps_used = 0;
  int em_iterations = 0;
  /// NaN when undefined (beta == 0).
  double bethe_free_energy = 0.0;
  std::uint64_t seed = 0;
  int restart = 0;

  const Marginals& marginals() const { return state.marginals; }
  const Messages& messages() const { return state.messages; }
};

/// Starting affinities: alpha = 1 and beta halfway between beta_zero and
/// beta_star at the average degree of g (frozen mode: beta_star itself).
ModelParams initial_params(const Graph& g, int q, bool frozen);

/// A single EM run from one seed.
EmResult em_run(const Graph& g, int q, const EmOptions& options, std::uint64_t seed);

/// Best of options.restarts runs by Bethe free energy; run r uses seed
/// derive_seed(options.seed, r). Never throws on non-convergence.
EmResult em_fit(const Graph& g, int q, const EmOptions& options);

/// True when every marginal lies within tol of 1/q (q >= 2 only).
bool is_factorized(const Marginals& marginals, double tol);

}  // namespace qstar

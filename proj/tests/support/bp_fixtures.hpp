#pragma once

#include "qstar/bp.hpp"

namespace qstar::testing {

/// Sweeps at fixed parameters until the residual drops below tol, then
/// recomputes the marginals self-consistently. Returns the sweep count, or
/// -1 when max_sweeps is exhausted.
///
/// On small graphs with strong coupling the asynchronous field update can
/// cycle; the fallback then alternates converging the messages at a frozen
/// theta with a damped theta update until theta is self-consistent.
inline int converge_bp(const Graph& g, const ModelParams& params, BpState& state, Rng& rng, double tol = 1e-14,
                       int max_sweeps = 5000) {
  const BpState start = state;
  for (int s = 1; s <= max_sweeps; ++s) {
    if (bp_sweep(g, params, state, {}, rng) < tol) {
      state.marginals = compute_marginals(g, params, state.messages, state.marginals.theta);
      return s;
    }
  }
  state = start;
  const Eigen::VectorXd d = g.degree_vector();
  int sweeps = 0;
  for (int outer = 0; outer < 20000; ++outer) {
    bool settled = false;
    for (int s = 0; s < 1000 && !settled; ++s, ++sweeps) settled = bp_sweep(g, params, state, {0.0, false}, rng) < tol;
    if (!settled) return -1;
    const Eigen::VectorXd next = state.marginals.psi * d;
    if ((next - state.marginals.theta).cwiseAbs().maxCoeff() < 1e-13) return sweeps;
    state.marginals.theta = 0.9 * state.marginals.theta + 0.1 * next;
  }
  return -1;
}

/// Random affinities with beta drawn from [-1, 2.5] and alpha from [0.5, 1.5].
inline ModelParams random_params(const Graph& g, Rng& rng) {
  const double beta = -1.0 + 3.5 * rng.uniform();
  const double alpha = 0.5 + rng.uniform();
  return ModelParams::from_alpha_beta(alpha, beta == 0.0 ? 0.1 : beta, g.num_edges());
}

// Messages and marginals that put all weight on the given label per vertex.
inline BpState hard_state(const Graph& g, const std::vector<int>& labels, int q) {
  BpState state = uniform_state(g, q);
  state.messages.psi.setZero();
  state.marginals.psi.setZero();
  for (Index a = 0; a < g.num_arcs(); ++a) state.messages.psi(labels[g.arc_source(a)], a) = 1.0;
  for (Index v = 0; v < g.num_vertices(); ++v) state.marginals.psi(labels[v], v) = 1.0;
  state.marginals.theta = state.marginals.psi * g.degree_vector();
  return state;
}

inline BpState permute_channels(const BpState& s, const std::vector<int>& perm) {
  BpState out = s;
  for (std::size_t c = 0; c < perm.size(); ++c) {
    out.messages.psi.row(perm[c]) = s.messages.psi.row(c);
    out.marginals.psi.row(perm[c]) = s.marginals.psi.row(c);
    out.marginals.theta[perm[c]] = s.marginals.theta[c];
  }
  return out;
}

}  // namespace qstar::testing

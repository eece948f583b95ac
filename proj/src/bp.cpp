#include "qstar/bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "qstar/criteria.hpp"
#include "qstar/detail/parallel.hpp"
#include "qstar/errors.hpp"

namespace qstar {
namespace {

// log(1 + psi (e^beta - 1)), rearranged for large |beta| so that e^beta is
// never formed.
class LogFactor {
 public:
  explicit LogFactor(double beta) : beta_(beta), expm1_(std::expm1(beta)), tail_(std::exp(-std::abs(beta))) {}

  double operator()(double psi) const {
    if (beta_ > 20.0) return beta_ + std::log(psi + (1.0 - psi) * tail_);
    if (beta_ < -20.0) return std::log((1.0 - psi) + psi * tail_);
    return std::log1p(psi * expm1_);
  }

 private:
  double beta_;
  double expm1_;
  double tail_;
};

void softmax(Eigen::Ref<Eigen::VectorXd> w) {
  const double top = w.maxCoeff();
  w = (w.array() - top).exp();
  w /= w.sum();
}

Eigen::MatrixXd incoming_log_factors(const Graph& g, const Eigen::MatrixXd& psi, const LogFactor& lf) {
  Eigen::MatrixXd field = Eigen::MatrixXd::Zero(psi.rows(), g.num_vertices());
  for (Index a = 0; a < g.num_arcs(); ++a) {
    const Index j = g.arc_target(a);
    for (Index s = 0; s < psi.rows(); ++s) field(s, j) += lf(psi(s, a));
  }
  return field;
}

double two_l_of(const Graph& g) { return 2.0 * static_cast<double>(g.num_edges()); }

bool e_step(const Graph& g, const ModelParams& params, BpState& state, const EmOptions& options, Rng& rng,
            int& sweeps) {
  SweepOptions sweep{options.damping, true};
  std::vector<double> history;
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int s = 0; s < options.max_sweeps; ++s) {
    const double r = bp_sweep(g, params, state, sweep, rng);
    ++sweeps;
    if (r < options.message_tol) return true;
    history.push_back(r);
    if (sweep.damping == 0.0 && history.size() > 10 && r >= history[history.size() - 11]) sweep.damping = 0.5;
    if (r < best) {
      best = r;
      stalled = 0;
    } else if (options.max_stalled_sweeps > 0 && ++stalled >= options.max_stalled_sweeps) {
      return false;
    }
  }
  return false;
}

double bethe_or_nan(const Graph& g, const BpState& state, const ModelParams& params) {
  try {
    return bethe_free_energy(g, state.messages, state.marginals, params);
  } catch (const DomainError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

BpState uniform_state(const Graph& g, int q) {
  if (q < 1) throw DomainError("q must be at least 1");
  BpState state;
  state.messages.psi = Eigen::MatrixXd::Constant(q, g.num_arcs(), 1.0 / q);
  state.marginals.psi = Eigen::MatrixXd::Constant(q, g.num_vertices(), 1.0 / q);
  state.marginals.theta = state.marginals.psi * g.degree_vector();
  return state;
}

BpState random_state(const Graph& g, int q, double noise, Rng& rng) {
  BpState state = uniform_state(g, q);
  if (q == 1) return state;
  auto& psi = state.messages.psi;
  for (Index a = 0; a < psi.cols(); ++a) {
    for (Index s = 0; s < q; ++s) psi(s, a) = 1.0 + noise * (2.0 * rng.uniform() - 1.0);
    psi.col(a) /= psi.col(a).sum();
  }
  return state;
}

double bp_sweep(const Graph& g, const ModelParams& params, BpState& state, const SweepOptions& options, Rng& rng) {
  const int q = state.q();
  auto& psi = state.messages.psi;
  auto& marg = state.marginals.psi;
  auto& theta = state.marginals.theta;
  if (q == 1) {
    psi.setOnes();
    marg.setOnes();
    theta.setConstant(1, two_l_of(g));
    return 0.0;
  }
  params.validate();
  const double coupling = params.coupling();
  const LogFactor lf(params.beta());

  if (options.refresh_field) theta = marg * g.degree_vector();
  // Log factors of the current messages, kept in step with psi so that each
  // update costs one logarithm per state.
  Eigen::MatrixXd logf(q, g.num_arcs());
  Eigen::MatrixXd field = Eigen::MatrixXd::Zero(q, g.num_vertices());
  for (Index a = 0; a < g.num_arcs(); ++a) {
    for (Index s = 0; s < q; ++s) logf(s, a) = lf(psi(s, a));
    field.col(g.arc_target(a)) += logf.col(a);
  }

  std::vector<Index> order(static_cast<std::size_t>(g.num_arcs()));
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(std::span<Index>(order));

  // Raw column pointers; the loop runs once per arc and per sweep.
  std::vector<double> w(static_cast<std::size_t>(q));
  auto normalize_exp = [&] {
    const double top = *std::max_element(w.begin(), w.end());
    double sum = 0.0;
    for (double& x : w) sum += (x = std::exp(x - top));
    for (double& x : w) x /= sum;
  };
  double* th = theta.data();
  double residual = 0.0;
  for (const Index a : order) {
    const Index i = g.arc_source(a);
    const Index j = g.arc_target(a);
    const double* field_i = field.col(i).data();
    const double* logf_back = logf.col(g.arc_reverse(a)).data();
    double* field_j = field.col(j).data();
    double* logf_a = logf.col(a).data();
    double* psi_a = psi.col(a).data();
    double* marg_j = marg.col(j).data();

    const double ci = -coupling * static_cast<double>(g.degree(i));
    for (int s = 0; s < q; ++s) w[s] = ci * th[s] + field_i[s] - logf_back[s];
    normalize_exp();
    if (options.damping > 0.0)
      for (int s = 0; s < q; ++s) w[s] = (1.0 - options.damping) * w[s] + options.damping * psi_a[s];
    for (int s = 0; s < q; ++s) {
      residual = std::max(residual, std::abs(w[s] - psi_a[s]));
      const double updated = lf(w[s]);
      field_j[s] += updated - logf_a[s];
      logf_a[s] = updated;
      psi_a[s] = w[s];
    }

    const double dj = static_cast<double>(g.degree(j));
    for (int s = 0; s < q; ++s) w[s] = -coupling * dj * th[s] + field_j[s];
    normalize_exp();
    for (int s = 0; s < q; ++s) {
      if (options.refresh_field) th[s] += dj * (w[s] - marg_j[s]);
      marg_j[s] = w[s];
    }
  }
  if (!psi.allFinite() || !theta.allFinite())
    throw NumericalError("BP produced a non-finite message; the log-domain products are already in use, so "
                         "check that the affinities are finite and positive");
  return residual;
}

Marginals compute_marginals(const Graph& g, const ModelParams& params, const Messages& messages,
                            const std::optional<Eigen::VectorXd>& theta_start) {
  const int q = messages.q();
  const Index n = g.num_vertices();
  const double two_l = two_l_of(g);
  Marginals out;
  if (q == 1) {
    out.psi = Eigen::MatrixXd::Ones(1, n);
    out.theta = Eigen::VectorXd::Constant(1, two_l);
    return out;
  }
  params.validate();
  const double coupling = params.coupling();
  const Eigen::MatrixXd field = incoming_log_factors(g, messages.psi, LogFactor(params.beta()));
  const Eigen::VectorXd d = g.degree_vector();

  Eigen::VectorXd theta = theta_start.value_or(Eigen::VectorXd::Constant(q, two_l / q));
  out.psi.resize(q, n);
  Eigen::VectorXd w(q);
  double relax = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 500; ++it) {
    for (Index v = 0; v < n; ++v) {
      w = -coupling * d[v] * theta + field.col(v);
      softmax(w);
      out.psi.col(v) = w;
    }
    const Eigen::VectorXd next = out.psi * d;
    const double diff = (next - theta).cwiseAbs().maxCoeff();
    theta = relax * theta + (1.0 - relax) * next;
    if (diff <= 1e-12 * std::max(1.0, two_l)) break;
    // An undamped fixed-point map can cycle when the coupling is strong.
    if (diff >= previous) relax = 0.5;
    previous = diff;
  }
  out.theta = out.psi * d;
  if (!out.psi.allFinite()) throw NumericalError("non-finite marginal; check the affinities");
  return out;
}

ModelParams m_step(const Graph& g, const Messages& messages, const Marginals& marginals, const ModelParams& params) {
  const double two_l = two_l_of(g);
  if (two_l <= 0.0) throw DomainError("parameter learning needs at least one edge");
  if (messages.q() == 1) return {1.0 / two_l, 1.0 / two_l};

  const double coupling = params.coupling();
  double sum_t = 0.0;
  for (Index e = 0; e < g.num_edges(); ++e) {
    const Index a = g.edge_arc(e);
    const double s = messages.psi.col(a).dot(messages.psi.col(g.arc_reverse(a)));
    sum_t += params.omega_in * s / (coupling * s + params.omega_out);
  }
  const double theta2 = marginals.theta.squaredNorm();
  const double in_den = theta2;
  const double out_den = two_l * two_l - theta2;
  if (!(in_den > 0.0) || !(out_den > 0.0))
    throw NumericalError("degenerate partition: all degree mass sits in a single cluster");

  const double floor = 1e-10 / two_l;
  const double edges = static_cast<double>(g.num_edges());
  return {std::max(2.0 * sum_t / in_den, floor), std::max(2.0 * (edges - sum_t) / out_den, floor)};
}

ModelParams initial_params(const Graph& g, int q, bool frozen) {
  if (g.num_edges() == 0) throw DomainError("inference needs at least one edge");
  const double c = two_l_of(g) / static_cast<double>(g.num_vertices());
  double beta = 1.0;
  if (frozen) {
    beta = beta_star(q, c);
  } else if (c > 1.0) {
    beta = 0.5 * (beta_zero(q, c) + beta_star(q, c));
  }
  return ModelParams::from_alpha_beta(1.0, beta, g.num_edges());
}

bool is_factorized(const Marginals& marginals, double tol) {
  const int q = marginals.q();
  if (q < 2) return false;
  return (marginals.psi.array() - 1.0 / q).abs().maxCoeff() < tol;
}

EmResult em_run(const Graph& g, int q, const EmOptions& options, std::uint64_t seed) {
  if (q < 1) throw DomainError("q must be at least 1");
  if (g.num_edges() == 0) throw DomainError("inference needs at least one edge");
  EmResult result;
  result.seed = seed;
  const double two_l = two_l_of(g);
  if (q == 1) {
    result.state = uniform_state(g, 1);
    result.params = {1.0 / two_l, 1.0 / two_l};
    result.converged = true;
    result.bethe_free_energy = bethe_or_nan(g, result.state, result.params);
    return result;
  }

  Rng rng(seed);
  ModelParams params = initial_params(g, q, options.frozen_params);
  BpState state = random_state(g, q, options.init_noise, rng);
  bool converged = false;
  int unsettled = 0;
  for (int it = 0; it < options.max_em_iterations; ++it) {
    const bool settled = e_step(g, params, state, options, rng, result.sweeps_used);
    state.marginals = compute_marginals(g, params, state.messages, state.marginals.theta);
    result.em_iterations = it + 1;
    if (options.frozen_params) {
      converged = settled;
      break;
    }
    unsettled = settled ? 0 : unsettled + 1;
    if (unsettled >= options.max_unsettled_e_steps) break;
    ModelParams next;
    try {
      next = m_step(g, state.messages, state.marginals, params);
    } catch (const NumericalError&) {
      break;
    }
    const double change = std::max(std::abs(next.omega_in - params.omega_in) / params.omega_in,
                                   std::abs(next.omega_out - params.omega_out) / params.omega_out);
    if (change < options.param_tol) {
      // Keep the parameters the messages were computed with.
      converged = settled;
      break;
    }
    params = next;
  }

  result.state = std::move(state);
  result.params = params;
  result.converged = converged;
  result.factorized = is_factorized(result.state.marginals, options.factorized_tol);
  result.bethe_free_energy = bethe_or_nan(g, result.state, params);
  return result;
}

EmResult em_fit(const Graph& g, int q, const EmOptions& options) {
  const int restarts = std::max(1, q == 1 ? 1 : options.restarts);
  std::vector<EmResult> runs(static_cast<std::size_t>(restarts));
  detail::parallel_for(restarts, options.jobs, [&](Index r) {
    runs[r] = em_run(g, q, options, derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    runs[r].restart = static_cast<int>(r);
  });
  auto key = [](const EmResult& r) {
    return std::isnan(r.bethe_free_energy) ? std::numeric_limits<double>::infinity() : r.bethe_free_energy;
  };
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (key(runs[r]) < key(runs[best])) best = r;
  return std::move(runs[best]);
}

}  // namespace qstar

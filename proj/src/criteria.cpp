#include "qstar/criteria.hpp"

#include <cmath>
#include <vector>

#include "qstar/errors.hpp"

namespace qstar {
namespace {

double plogp(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& w) {
  const double top = w.maxCoeff();
  return top + std::log((w.array() - top).exp().sum());
}

// log(1 + x (e^beta - 1)) for x in [0, 1] without forming e^beta.
double log_factor(double x, double beta) {
  if (beta > 20.0) return beta + std::log(x + (1.0 - x) * std::exp(-beta));
  if (beta < -20.0) return std::log((1.0 - x) + x * std::exp(beta));
  return std::log1p(x * std::expm1(beta));
}

Index argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Index best = 0;
  for (Index s = 1; s < v.size(); ++s)
    if (v[s] > v[best]) best = s;
  return best;
}

// 1 - (1/L) sum_E [w log(d_i omega_in d_j) + (1 - w) log(d_i omega_out d_j)]
// where w(e) is the weight put on same-cluster assignments for edge e.
template <typename Weight>
double cross_entropy_error(const Graph& g, const ModelParams& params, Weight&& weight) {
  params.validate();
  if (g.num_edges() == 0) throw DomainError("prediction errors need at least one edge");
  const double log_in = std::log(params.omega_in);
  const double log_out = std::log(params.omega_out);
  double total = 0.0;
  for (Index e = 0; e < g.num_edges(); ++e) {
    const auto& edge = g.edges()[e];
    const double ld = std::log(static_cast<double>(g.degree(edge.u)) * static_cast<double>(g.degree(edge.v)));
    const double w = weight(e);
    total += w * (ld + log_in) + (1.0 - w) * (ld + log_out);
  }
  return 1.0 - total / static_cast<double>(g.num_edges());
}

}  // namespace

PairStats pair_stats(const Graph& g, const Messages& messages, const ModelParams& params) {
  PairStats stats;
  stats.overlap.resize(g.num_edges());
  stats.z.resize(g.num_edges());
  for (Index e = 0; e < g.num_edges(); ++e) {
    const Index a = g.edge_arc(e);
    const double s = messages.psi.col(a).dot(messages.psi.col(g.arc_reverse(a)));
    const auto& edge = g.edges()[e];
    const double dd = static_cast<double>(g.degree(edge.u)) * static_cast<double>(g.degree(edge.v));
    stats.overlap[e] = s;
    stats.z[e] = dd * (params.coupling() * s + params.omega_out);
  }
  return stats;
}

double bethe_log_partition(const Graph& g, const Messages& messages, const Marginals& marginals,
                           const ModelParams& params) {
  params.validate();
  const int q = messages.q();
  const Index n = g.num_vertices();
  const double two_l = 2.0 * static_cast<double>(g.num_edges());
  const double beta = params.beta();
  const double coupling = params.coupling();
  const double log_out = std::log(params.omega_out);
  const Eigen::VectorXd d = g.degree_vector();

  // Vertex terms. With h_s = 2L omega_out + coupling theta_s and
  // omega_out + coupling psi = omega_out (1 + psi (e^beta - 1)), the
  // cluster-independent parts of log Z^i factor out of the sum over s.
  Eigen::MatrixXd field = Eigen::MatrixXd::Zero(q, n);
  for (Index a = 0; a < g.num_arcs(); ++a)
    for (Index s = 0; s < q; ++s) field(s, g.arc_target(a)) += log_factor(messages.psi(s, a), beta);
  const Eigen::VectorXd theta = marginals.psi * d;
  double total = -two_l * two_l * params.omega_out;
  for (Index i = 0; i < n; ++i) total += log_sum_exp(-coupling * d[i] * theta + field.col(i));

  // Edge terms: the vertex sums count log(d_i d_j omega_out) once from each
  // end, log Z^ij removes it once.
  double edge_product = 0.0;
  double edge_overlap = 0.0;
  for (Index e = 0; e < g.num_edges(); ++e) {
    const auto& edge = g.edges()[e];
    const Index a = g.edge_arc(e);
    const double s = messages.psi.col(a).dot(messages.psi.col(g.arc_reverse(a)));
    const double dd = d[edge.u] * d[edge.v];
    total += std::log(dd) + log_out - log_factor(s, beta);
    edge_product += dd;
    edge_overlap += dd * marginals.psi.col(edge.u).dot(marginals.psi.col(edge.v));
  }

  // Non-edges: -log Z~^ij = d_i d_j [coupling psi^i . psi^j + omega_out],
  // summed over all pairs i < j through theta and corrected for the edges.
  double self_overlap = 0.0;
  for (Index i = 0; i < n; ++i) self_overlap += d[i] * d[i] * marginals.psi.col(i).squaredNorm();
  const double pair_overlap = 0.5 * (theta.squaredNorm() - self_overlap) - edge_overlap;
  const double pair_product = 0.5 * (two_l * two_l - d.squaredNorm()) - edge_product;
  total += coupling * pair_overlap + params.omega_out * pair_product;
  return total;
}

double bethe_free_energy(const Graph& g, const Messages& messages, const Marginals& marginals,
                         const ModelParams& params) {
  params.validate();
  const double beta = params.beta();
  if (beta == 0.0) throw DomainError("Bethe free energy is undefined at beta = 0");
  return -bethe_log_partition(g, messages, marginals, params) / (beta * static_cast<double>(g.num_vertices()));
}

Partition hard_partition(const Marginals& marginals) {
  Partition p;
  p.q = marginals.q();
  p.labels.resize(static_cast<std::size_t>(marginals.psi.cols()));
  for (Index v = 0; v < marginals.psi.cols(); ++v) p.labels[v] = static_cast<int>(argmax(marginals.psi.col(v)));
  return p;
}

double modularity(const Graph& g, const Partition& partition, double alpha) {
  if (g.num_edges() == 0) return 0.0;
  const auto q = static_cast<std::size_t>(partition.q);
  std::vector<double> inside(q, 0.0), mass(q, 0.0), square(q, 0.0);
  for (const auto& e : g.edges()) {
    if (partition.labels[e.u] == partition.labels[e.v]) inside[partition.labels[e.u]] += 1.0;
  }
  for (Index v = 0; v < g.num_vertices(); ++v) {
    const double d = static_cast<double>(g.degree(v));
    mass[partition.labels[v]] += d;
    square[partition.labels[v]] += d * d;
  }
  const double two_l = 2.0 * static_cast<double>(g.num_edges());
  double total = 0.0;
  for (std::size_t c = 0; c < q; ++c) total += inside[c] - alpha * (mass[c] * mass[c] - square[c]) / (2.0 * two_l);
  return total / two_l;
}

double retrieval_modularity(const Graph& g, const Marginals& marginals, double alpha) {
  return modularity(g, hard_partition(marginals), alpha);
}

double map_equation_mdl(const Graph& g, const Partition& partition) {
  if (g.num_edges() == 0) return 0.0;
  const double two_l = 2.0 * static_cast<double>(g.num_edges());
  const auto q = static_cast<std::size_t>(partition.q);
  std::vector<double> exit(q, 0.0), visit(q, 0.0);
  for (const auto& e : g.edges()) {
    const int a = partition.labels[e.u];
    const int b = partition.labels[e.v];
    if (a != b) {
      exit[a] += 1.0 / two_l;
      exit[b] += 1.0 / two_l;
    }
  }
  double vertex_entropy = 0.0;
  for (Index v = 0; v < g.num_vertices(); ++v) {
    const double p = static_cast<double>(g.degree(v)) / two_l;
    visit[partition.labels[v]] += p;
    vertex_entropy += plogp(p);
  }
  double exit_total = 0.0, exit_terms = 0.0, module_terms = 0.0;
  for (std::size_t m = 0; m < q; ++m) {
    exit_total += exit[m];
    exit_terms += plogp(exit[m]);
    module_terms += plogp(exit[m] + visit[m]);
  }
  return plogp(exit_total) - 2.0 * exit_terms - vertex_entropy + module_terms;
}

double e_bayes(const Graph& g, const PairStats& stats) {
  if (g.num_edges() == 0) throw DomainError("prediction errors need at least one edge");
  double total = 0.0;
  for (Index e = 0; e < stats.z.size(); ++e) {
    if (!(stats.z[e] > 0.0)) throw InvalidStateError("non-positive edge partition function");
    total += std::log(stats.z[e]);
  }
  return 1.0 - total / static_cast<double>(g.num_edges());
}

double e_gibbs(const Graph& g, const Messages& messages, const ModelParams& params) {
  return cross_entropy_error(g, params, [&](Index e) {
    const Index a = g.edge_arc(e);
    return messages.psi.col(a).dot(messages.psi.col(g.arc_reverse(a)));
  });
}

double e_map(const Graph& g, const Messages& messages, const ModelParams& params) {
  return cross_entropy_error(g, params, [&](Index e) {
    const Index a = g.edge_arc(e);
    return argmax(messages.psi.col(a)) == argmax(messages.psi.col(g.arc_reverse(a))) ? 1.0 : 0.0;
  });
}

double e_training(const Graph& g, const Messages& /*messages*/, const PairStats& stats, const ModelParams& params) {
  return cross_entropy_error(g, params, [&](Index e) {
    if (!(stats.z[e] > 0.0)) throw InvalidStateError("non-positive edge partition function");
    const auto& edge = g.edges()[e];
    const double dd = static_cast<double>(g.degree(edge.u)) * static_cast<double>(g.degree(edge.v));
    return dd * params.omega_in * stats.overlap[e] / stats.z[e];
  });
}

CriteriaRecord evaluate_criteria(const Graph& g, const EmResult& fit, double modularity_alpha) {
  CriteriaRecord r;
  const Partition hard = hard_partition(fit.marginals());
  const PairStats stats = pair_stats(g, fit.messages(), fit.params);
  r.q_input = fit.state.q();
  r.q_effective = hard.effective_count();
  r.bethe_f = fit.bethe_free_energy;
  r.modularity = modularity(g, hard, modularity_alpha);
  r.mdl_two_level = map_equation_mdl(g, hard);
  r.e_bayes = e_bayes(g, stats);
  r.e_gibbs = e_gibbs(g, fit.messages(), fit.params);
  r.e_map = e_map(g, fit.messages(), fit.params);
  r.e_training = e_training(g, fit.messages(), stats, fit.params);
  r.omega_in = fit.params.omega_in;
  r.omega_out = fit.params.omega_out;
  r.alpha = fit.params.alpha(g.num_edges());
  r.beta = fit.params.beta();
  r.factorized = fit.factorized;
  r.converged = fit.converged;
  return r;
}

}  // namespace qstar

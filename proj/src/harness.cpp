#include "qstar/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qstar/detail/parallel.hpp"
#include "qstar/errors.hpp"
#include "qstar/model.hpp"

namespace qstar {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream offsets for the derived seeds of the non-EM estimators.
constexpr std::uint64_t kLouvainStream = 1u << 20;
constexpr std::uint64_t kInfomapStream = kLouvainStream + 1;
constexpr std::uint64_t kSpectralStream = kLouvainStream + 2;

SweepRow failed_row(int q, std::string message) {
  SweepRow row;
  row.record.q_input = q;
  auto& r = row.record;
  r.bethe_f = r.modularity = r.mdl_two_level = r.e_bayes = r.e_gibbs = r.e_map = r.e_training = kNaN;
  r.omega_in = r.omega_out = r.alpha = r.beta = kNaN;
  row.error = std::move(message);
  return row;
}

}  // namespace

int default_q_max(const Graph& g) {
  return static_cast<int>(std::max<Index>(1, std::min<Index>(30, g.num_vertices() / 10)));
}

SweepReport sweep(const Graph& g, const SweepConfig& config) {
  SweepReport report;
  report.n = g.num_vertices();
  report.num_edges = g.num_edges();
  report.source = config.source;
  report.seed = config.seed;
  report.q_min = config.q_min;
  report.q_max = config.q_max > 0 ? config.q_max : std::max(config.q_min, default_q_max(g));
  if (report.q_min < 1 || report.q_max < report.q_min) throw DomainError("need 1 <= q_min <= q_max");

  const double c = g.num_vertices() > 0 ? 2.0 * static_cast<double>(g.num_edges()) / g.num_vertices() : 0.0;
  const int count = report.q_max - report.q_min + 1;
  report.rows.resize(static_cast<std::size_t>(count));
  detail::parallel_for(count, config.jobs, [&](Index idx) {
    const int q = report.q_min + static_cast<int>(idx);
    EmOptions em = config.em;
    em.seed = derive_seed(config.seed, static_cast<std::uint64_t>(q));
    em.jobs = 1;
    SweepRow row;
    try {
      const EmResult fit = em_fit(g, q, em);
      row.record = evaluate_criteria(g, fit, config.modularity_alpha);
      row.sweeps_used = fit.sweeps_used;
      if (config.keep_marginals) row.marginals = fit.marginals();
    } catch (const std::exception& e) {
      row = failed_row(q, e.what());
    }
    row.seed = em.seed;
    row.beta0_ref = c > 1.0 ? beta_zero(q, c) : kNaN;
    row.betastar_ref = c > 1.0 ? beta_star(q, c) : kNaN;
    report.rows[idx] = std::move(row);
  });

  if (config.run_spectral) {
    try {
      SpectralOptions options = config.spectral;
      options.krylov.seed = derive_seed(config.seed, kSpectralStream);
      report.modularity_spectrum = modularity_eigs(g, 1.0, options);
      report.nb_spectrum = nb_eigs(g, options);
    } catch (const std::exception& e) {
      report.spectral_error = e.what();
    }
  }
  if (config.run_greedy && g.num_vertices() > 0) {
    report.louvain = greedy_stats(g, GreedyMethod::louvain, config.greedy_runs,
                                  derive_seed(config.seed, kLouvainStream), config.greedy_alpha, config.jobs);
    report.infomap = greedy_stats(g, GreedyMethod::infomap, config.greedy_runs,
                                  derive_seed(config.seed, kInfomapStream), config.greedy_alpha, config.jobs);
  }
  return report;
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::bethe: return "bethe_f";
    case Criterion::modularity: return "modularity";
    case Criterion::mdl: return "mdl";
    case Criterion::e_bayes: return "e_bayes";
    case Criterion::e_gibbs: return "e_gibbs";
    case Criterion::e_map: return "e_map";
    case Criterion::e_training: return "e_training";
  }
  return "unknown";
}

const std::vector<Criterion>& all_criteria() {
  static const std::vector<Criterion> all{Criterion::bethe,   Criterion::modularity, Criterion::mdl,
                                          Criterion::e_bayes, Criterion::e_gibbs,    Criterion::e_map,
                                          Criterion::e_training};
  return all;
}

double criterion_value(const SweepRow& row, Criterion c) {
  const auto& r = row.record;
  switch (c) {
    case Criterion::bethe: return r.bethe_f;
    case Criterion::modularity: return r.modularity;
    case Criterion::mdl: return r.mdl_two_level;
    case Criterion::e_bayes: return r.e_bayes;
    case Criterion::e_gibbs: return r.e_gibbs;
    case Criterion::e_map: return r.e_map;
    case Criterion::e_training: return r.e_training;
  }
  return kNaN;
}

bool maximized(Criterion c) { return c == Criterion::modularity; }

Selection select_q(const std::vector<SweepRow>& rows, Criterion criterion, SelectionRule rule, double delta) {
  if (rows.empty()) throw DomainError("select_q needs at least one row");
  std::vector<const SweepRow*> ordered;
  for (const auto& row : rows) ordered.push_back(&row);
  std::sort(ordered.begin(), ordered.end(),
            [](const SweepRow* a, const SweepRow* b) { return a->record.q_input < b->record.q_input; });

  std::vector<std::pair<int, double>> eligible;
  bool any_unfactorized = false;
  bool seen_factorized = false;
  for (const SweepRow* row : ordered) {
    if (seen_factorized) break;
    const double v = criterion_value(*row, criterion);
    if (!row->error.empty() || std::isnan(v)) continue;
    if (row->record.factorized) seen_factorized = true;
    else any_unfactorized = true;
    eligible.emplace_back(row->record.q_input, maximized(criterion) ? -v : v);
  }
  Selection sel;
  if (eligible.empty() || !any_unfactorized) return sel;

  if (rule == SelectionRule::argopt) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < eligible.size(); ++i)
      if (eligible[i].second < eligible[best].second) best = i;
    sel.q = eligible[best].first;
    sel.at_boundary = eligible.size() > 1 && best + 1 == eligible.size();
    return sel;
  }
  for (std::size_t i = 0; i + 1 < eligible.size(); ++i) {
    const double cur = eligible[i].second;
    const double gain = cur - eligible[i + 1].second;
    const double relative = cur != 0.0 ? gain / std::abs(cur) : gain;
    if (relative < delta) {
      sel.q = eligible[i].first;
      return sel;
    }
  }
  return sel;
}

}  // namespace qstar

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qstar/bp.hpp"
#include "qstar/criteria.hpp"
#include "qstar/graph.hpp"
#include "qstar/greedy.hpp"
#include "qstar/spectral.hpp"

namespace qstar {

struct SweepConfig {
  int q_min = 1;
  int q_max = 0;  // 0 means default_q_max(g)
  EmOptions em;   // em.seed is replaced by a per-q seed derived from `seed`
  double modularity_alpha = 1.0;
  bool run_spectral = true;
  SpectralOptions spectral;
  bool run_greedy = true;
  int greedy_runs = 30;
  double greedy_alpha = 1.0;
  bool keep_marginals = false;
  int jobs = 1;
  std::uint64_t seed = 1;
  std::string source;
};

/// max(1, min(30, N / 10)).
int default_q_max(const Graph& g);

struct SweepRow {
  CriteriaRecord record;
  /// beta_zero and beta_star at the graph's average degree (NaN if c <= 1).
  double beta0_ref = 0.0;
  double betastar_ref = 0.0;
  int sweeps_used = 0;
  std::uint64_t seed = 0;
  /// Non-empty when this q failed; numeric fields are then NaN.
  std::string error;
  std::optional<Marginals> marginals;
};

struct SweepReport {
  Index n = 0;
  Index num_edges = 0;
  std::string source;
  std::uint64_t seed = 0;
  int q_min = 1;
  int q_max = 1;
  std::vector<SweepRow> rows;
  std::optional<SpectralReport> modularity_spectrum;
  std::optional<SpectralReport> nb_spectrum;
  std::string spectral_error;
  std::optional<GreedySummary> louvain;
  std::optional<GreedySummary> infomap;
};

/// Fits every q in [q_min, q_max], scores it, and adds the spectral and
/// greedy estimates. Output depends only on (g, config), not on jobs.
SweepReport sweep(const Graph& g, const SweepConfig& config);

enum class Criterion { bethe, modularity, mdl, e_bayes, e_gibbs, e_map, e_training };
enum class SelectionRule { argopt, elbow };

std::string to_string(Criterion c);
const std::vector<Criterion>& all_criteria();
/// Row value of a criterion (NaN when missing).
double criterion_value(const SweepRow& row, Criterion c);
/// Modularity is maximized, everything else minimized.
bool maximized(Criterion c);

struct Selection {
  std::optional<int> q;  // empty means undetermined
  /// argopt picked the largest eligible q, so the optimum may lie beyond the
  /// sweep range.
  bool at_boundary = false;
};

/// Suggests q* from the rows. Rows with an error or a NaN value are skipped,
/// as are factorized rows after the first factorized q. argopt returns the
/// optimum (ties to the smaller q); elbow returns the smallest q whose
/// relative improvement to the next row is below delta.
Selection select_q(const std::vector<SweepRow>& rows, Criterion criterion, SelectionRule rule, double delta = 0.01);

}  // namespace qstar

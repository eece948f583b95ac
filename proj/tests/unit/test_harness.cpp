#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qstar/errors.hpp"
#include "qstar/generators.hpp"
#include "qstar/harness.hpp"
#include "qstar/serialize.hpp"
#include "support/oracles.hpp"

using namespace qstar;
using namespace qstar::testing;

namespace {

// Rows q = 1.. with the given E_Bayes curve.
std::vector<SweepRow> curve(const std::vector<double>& values, int factorized_from = 0) {
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRow row;
    row.record.q_input = static_cast<int>(i) + 1;
    row.record.e_bayes = values[i];
    row.record.factorized = factorized_from > 0 && row.record.q_input >= factorized_from;
    rows.push_back(row);
  }
  return rows;
}

SweepConfig quick_config(int q_min, int q_max) {
  SweepConfig c;
  c.q_min = q_min;
  c.q_max = q_max;
  c.em.restarts = 2;
  c.greedy_runs = 4;
  c.seed = 12;
  return c;
}

}  // namespace

TEST(SelectQ, KneeAtThree) {
  const auto rows = curve({0.9, 0.6, 0.4, 0.399, 0.3989});
  EXPECT_EQ(select_q(rows, Criterion::e_bayes, SelectionRule::elbow, 0.01).q, 3);
}

TEST(SelectQ, MonotoneCurve) {
  const auto rows = curve({1.0, 0.8, 0.6, 0.4, 0.2});
  EXPECT_FALSE(select_q(rows, Criterion::e_bayes, SelectionRule::elbow).q.has_value());
  const auto arg = select_q(rows, Criterion::e_bayes, SelectionRule::argopt);
  EXPECT_EQ(arg.q, 5);
  EXPECT_TRUE(arg.at_boundary);
}

TEST(SelectQ, InteriorMinimum) {
  const auto arg = select_q(curve({0.9, 0.7, 0.5, 0.3, 0.35, 0.4}), Criterion::e_bayes, SelectionRule::argopt);
  EXPECT_EQ(arg.q, 4);
  EXPECT_FALSE(arg.at_boundary);
}

TEST(SelectQ, ModularityIsMaximized) {
  auto rows = curve({0, 0, 0, 0});
  const double q[] = {0.0, 0.3, 0.45, 0.44};
  for (int i = 0; i < 4; ++i) rows[i].record.modularity = q[i];
  EXPECT_EQ(select_q(rows, Criterion::modularity, SelectionRule::argopt).q, 3);
}

TEST(SelectQ, RowsAfterFirstFactorizedAreIgnored) {
  // q = 4 is factorized; q = 5 would win if it were considered.
  const auto rows = curve({0.9, 0.5, 0.45, 0.46, 0.1}, 4);
  const auto arg = select_q(rows, Criterion::e_bayes, SelectionRule::argopt);
  EXPECT_EQ(arg.q, 3);
}

TEST(SelectQ, AllFactorizedIsUndetermined) {
  const auto rows = curve({0.5, 0.5, 0.5}, 1);
  EXPECT_FALSE(select_q(rows, Criterion::e_bayes, SelectionRule::argopt).q.has_value());
  EXPECT_FALSE(select_q(rows, Criterion::e_bayes, SelectionRule::elbow).q.has_value());
}

TEST(SelectQ, ErrorRowsAndNanAreSkipped) {
  auto rows = curve({0.9, 0.2, 0.5});
  rows[1].error = "failed";
  EXPECT_EQ(select_q(rows, Criterion::e_bayes, SelectionRule::argopt).q, 3);
  rows[1].error.clear();
  rows[1].record.e_bayes = std::nan("");
  EXPECT_EQ(select_q(rows, Criterion::e_bayes, SelectionRule::argopt).q, 3);
  EXPECT_THROW(select_q({}, Criterion::e_bayes, SelectionRule::argopt), DomainError);
}

TEST(Sweep, DefaultQMax) {
  EXPECT_EQ(default_q_max(complete_graph(5)), 1);
  EXPECT_EQ(default_q_max(complete_graph(34)), 3);
  Rng rng(1);
  EXPECT_EQ(default_q_max(random_tree(1000, rng)), 30);
}

TEST(Sweep, SingleTrivialRow) {
  const auto [g, truth] = generate_sbm(SbmSpec::from_average_degree(200, 2, 6.0, 0.2), 1);
  auto config = quick_config(1, 1);
  config.run_greedy = false;
  config.run_spectral = false;
  const auto report = sweep(g, config);
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_EQ(report.rows[0].record.q_input, 1);
  EXPECT_LE(report.rows[0].sweeps_used, 1);
  EXPECT_TRUE(report.rows[0].error.empty());
  // One cluster: every edge is predicted with d_i d_j / 2L.
  const double two_l = 2.0 * static_cast<double>(g.num_edges());
  double sum = 0.0;
  for (const auto& e : g.edges()) sum += std::log(g.degree(e.u) * g.degree(e.v) / two_l);
  EXPECT_NEAR(report.rows[0].record.e_bayes, 1.0 - sum / static_cast<double>(g.num_edges()), 1e-10);
}

TEST(Sweep, RejectsBadRange) {
  const Graph g = complete_graph(4);
  EXPECT_THROW(sweep(g, quick_config(0, 2)), DomainError);
  EXPECT_THROW(sweep(g, quick_config(3, 2)), DomainError);
}

TEST(Sweep, RowsParametersAndReferences) {
  const auto [g, truth] = generate_sbm(SbmSpec::from_average_degree(400, 2, 8.0, 0.05), 3);
  const auto report = sweep(g, quick_config(1, 4));
  ASSERT_EQ(report.rows.size(), 4u);
  const double two_l = 2.0 * static_cast<double>(g.num_edges());
  for (int i = 0; i < 4; ++i) {
    const auto& r = report.rows[i].record;
    EXPECT_EQ(r.q_input, i + 1);
    EXPECT_TRUE(report.rows[i].error.empty());
    if (r.q_input == 1) continue;
    EXPECT_NEAR(r.beta, std::log(r.omega_in / r.omega_out), 1e-9);
    EXPECT_NEAR(r.alpha, two_l * (r.omega_in - r.omega_out) / r.beta, 1e-9 * std::max(1.0, std::abs(r.alpha)));
    EXPECT_TRUE(std::isfinite(report.rows[i].beta0_ref));
    EXPECT_LT(report.rows[i].beta0_ref, report.rows[i].betastar_ref);
  }
  EXPECT_EQ(select_q(report.rows, Criterion::e_bayes, SelectionRule::argopt).q, 2);
  ASSERT_TRUE(report.nb_spectrum.has_value());
  EXPECT_EQ(report.nb_spectrum->q_star, 2);
  ASSERT_TRUE(report.louvain.has_value());
  EXPECT_EQ(report.louvain->runs.size(), 4u);
}

TEST(Sweep, DeterministicAcrossJobs) {
  const auto [g, truth] = generate_sbm(SbmSpec::from_average_degree(300, 3, 8.0, 0.1), 5);
  auto config = quick_config(1, 4);
  config.keep_marginals = true;
  const std::string a = to_json(sweep(g, config), true).dump();
  config.jobs = 3;
  const std::string b = to_json(sweep(g, config), true).dump();
  EXPECT_EQ(a, b);
  config.seed = 13;
  EXPECT_NE(a, to_json(sweep(g, config), true).dump());
}

TEST(Sweep, CsvRoundTripPreservesSelection) {
  const Graph g = load_edge_list(std::string(QSTAR_TEST_DATA) + "/karate.txt");
  auto config = quick_config(1, 5);
  config.run_greedy = false;
  const auto report = sweep(g, config);
  std::stringstream csv;
  write_rows_csv(report, csv);
  const auto rows = read_rows_csv(csv);
  ASSERT_EQ(rows.size(), report.rows.size());
  for (Criterion c : all_criteria()) {
    for (auto rule : {SelectionRule::argopt, SelectionRule::elbow}) {
      const auto x = select_q(report.rows, c, rule);
      const auto y = select_q(rows, c, rule);
      EXPECT_EQ(x.q, y.q) << to_string(c);
      EXPECT_EQ(x.at_boundary, y.at_boundary);
    }
    // Independent arg-optimum straight from the parsed numbers; it needs at
    // least one scored non-factorized row.
    std::optional<int> best;
    double best_value = 0.0;
    bool any_unfactorized = false;
    for (const auto& row : rows) {
      const double v = criterion_value(row, c);
      if (std::isnan(v)) continue;
      const double signed_v = maximized(c) ? -v : v;
      if (!best || signed_v < best_value) best = row.record.q_input, best_value = signed_v;
      if (row.record.factorized) break;
      any_unfactorized = true;
    }
    if (!any_unfactorized) best.reset();
    EXPECT_EQ(select_q(rows, c, SelectionRule::argopt).q, best) << to_string(c);
  }
  std::stringstream bad("q,nope\n");
  EXPECT_THROW(read_rows_csv(bad), ParseError);
}

TEST(Sweep, KarateSpectralColumns) {
  const Graph g = load_edge_list(std::string(QSTAR_TEST_DATA) + "/karate.txt");
  auto config = quick_config(1, 6);
  config.run_greedy = false;
  const auto report = sweep(g, config);
  ASSERT_TRUE(report.modularity_spectrum && report.nb_spectrum);
  EXPECT_EQ(report.modularity_spectrum->q_star, 1);
  EXPECT_EQ(report.nb_spectrum->q_star, 2);
}

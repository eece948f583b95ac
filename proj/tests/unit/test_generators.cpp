#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "qstar/errors.hpp"
#include "qstar/generators.hpp"

using namespace qstar;

namespace {

double mean_degree(const Graph& g) { return 2.0 * g.num_edges() / static_cast<double>(g.num_vertices()); }

double degree_variance(const Graph& g) {
  const double m = mean_degree(g);
  double v = 0.0;
  for (Index i = 0; i < g.num_vertices(); ++i) v += (g.degree(i) - m) * (g.degree(i) - m);
  return v / static_cast<double>(g.num_vertices());
}

// Variance of the edge count: the pairs are independent Bernoulli draws.
double edge_count_variance(const SbmSpec& spec) {
  const auto sizes = spec.resolved_sizes();
  double var = 0.0;
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    const double s = static_cast<double>(sizes[a]);
    var += s * (s - 1) / 2 * spec.omega_in * (1 - spec.omega_in);
    for (std::size_t b = a + 1; b < sizes.size(); ++b)
      var += s * static_cast<double>(sizes[b]) * spec.omega_out * (1 - spec.omega_out);
  }
  return var;
}

}  // namespace

TEST(Sbm, AverageDegreeFormula) {
  const auto spec = SbmSpec::from_average_degree(2000, 2, 6.0, 0.1);
  EXPECT_NEAR(spec.omega_out, 0.1 * spec.omega_in, 1e-18);
  EXPECT_NEAR(spec.omega_in * (1000 - 1) + spec.omega_out * 1000, 6.0, 1e-12);
  EXPECT_NEAR(2.0 * expected_edge_count(spec) / 2000.0, 6.0, 1e-9);
}

TEST(Sbm, MeanDegreeOverSeeds) {
  const auto spec = SbmSpec::from_average_degree(2000, 2, 6.0, 0.1);
  const int seeds = 100;
  double sum = 0.0;
  for (int s = 0; s < seeds; ++s) sum += mean_degree(generate_sbm(spec, 1000 + s).first);
  const double sd_single = 2.0 * std::sqrt(edge_count_variance(spec)) / 2000.0;
  EXPECT_LT(std::abs(sum / seeds - 6.0), 3.0 * sd_single / std::sqrt(seeds));
}

TEST(Sbm, EdgeCountWithinThreeSigmaForUnequalSizes) {
  SbmSpec spec;
  spec.n = 300;
  spec.q_planted = 3;
  spec.sizes = {50, 100, 150};
  spec.omega_in = 0.05;
  spec.omega_out = 0.01;
  const int seeds = 200;
  double sum = 0.0;
  for (int s = 0; s < seeds; ++s) sum += generate_sbm(spec, s).first.num_edges();
  const double sd = std::sqrt(edge_count_variance(spec) / seeds);
  EXPECT_LT(std::abs(sum / seeds - expected_edge_count(spec)), 3.0 * sd);
}

TEST(Sbm, PlantedSizesAndDeterminism) {
  SbmSpec spec;
  spec.n = 10;
  spec.q_planted = 3;
  spec.omega_in = 0.5;
  spec.omega_out = 0.1;
  const auto [g, planted] = generate_sbm(spec, 42);
  EXPECT_EQ(planted.sizes(), (std::vector<Index>{4, 3, 3}));
  EXPECT_EQ(planted.q, 3);
  EXPECT_EQ(generate_sbm(spec, 42).first, g);

  spec.sizes = {1, 2, 7};
  EXPECT_EQ(generate_sbm(spec, 1).second.sizes(), (std::vector<Index>{1, 2, 7}));
}

TEST(Sbm, OnlyInBlockEdgesWhenOutIsZero) {
  SbmSpec spec{200, 4, {}, 0.2, 0.0};
  const auto [g, planted] = generate_sbm(spec, 5);
  ASSERT_GT(g.num_edges(), 0);
  for (const auto& e : g.edges()) EXPECT_EQ(planted.labels[e.u], planted.labels[e.v]);
}

TEST(Sbm, CompleteWhenProbabilityOne) {
  SbmSpec spec{7, 2, {}, 1.0, 1.0};
  EXPECT_EQ(generate_sbm(spec, 0).first.num_edges(), 21);
}

TEST(Sbm, ZeroProbabilityGivesEmptyGraph) {
  SbmSpec spec{50, 2, {}, 0.0, 0.0};
  const auto g = generate_sbm(spec, 3).first;
  EXPECT_EQ(g.num_vertices(), 50);
  EXPECT_EQ(g.num_edges(), 0);
}

TEST(Sbm, InvalidSpecs) {
  EXPECT_THROW(generate_sbm(SbmSpec{10, 2, {}, 1.5, 0.1}, 1), DomainError);
  EXPECT_THROW(generate_sbm(SbmSpec{10, 2, {}, 0.5, -0.1}, 1), DomainError);
  EXPECT_THROW(generate_sbm(SbmSpec{10, 2, {3, 3}, 0.5, 0.1}, 1), DomainError);
  EXPECT_THROW(generate_sbm(SbmSpec{10, 0, {}, 0.5, 0.1}, 1), DomainError);
}

TEST(DcSbm, EqualPropensitiesMatchSbm) {
  // t^2 w equals the SBM probabilities, so both models draw every pair
  // with the same probability; compare degree moments over seeds.
  const auto sbm = SbmSpec::from_average_degree(600, 2, 8.0, 0.3);
  DcSbmSpec dc;
  dc.n = 600;
  dc.q_planted = 2;
  dc.propensities.assign(600, 4.0);
  dc.omega_in = sbm.omega_in / 16.0;
  dc.omega_out = sbm.omega_out / 16.0;
  EXPECT_NEAR(expected_edge_count(dc), expected_edge_count(sbm), 1e-8);

  const int seeds = 30;
  double m_sbm = 0, m_dc = 0, v_sbm = 0, v_dc = 0;
  for (int s = 0; s < seeds; ++s) {
    const auto a = generate_sbm(sbm, 10 + s).first;
    const auto b = generate_dcsbm(dc, 500 + s).first;
    m_sbm += mean_degree(a) / seeds;
    m_dc += mean_degree(b) / seeds;
    v_sbm += degree_variance(a) / seeds;
    v_dc += degree_variance(b) / seeds;
  }
  const double se = 3.0 * 2.0 * std::sqrt(expected_edge_count(sbm) / seeds) / 600.0;
  EXPECT_LT(std::abs(m_sbm - m_dc), 2.0 * se);
  EXPECT_NEAR(v_dc / v_sbm, 1.0, 0.1);
}

TEST(DcSbm, PowerLawTailIsHeavierThanPoisson) {
  Rng rng(9);
  const auto t = power_law_propensities(2000, 2.0, 3.0, 100.0, rng);
  for (double x : t) {
    EXPECT_GE(x, 3.0);
    EXPECT_LE(x, 100.0);
  }
  const auto spec = DcSbmSpec::with_expected_degrees(t, 2, 0.3);
  double ratio = 0.0;
  for (int s = 0; s < 5; ++s) {
    const auto g = generate_dcsbm(spec, s).first;
    ratio += degree_variance(g) / mean_degree(g) / 5;
  }
  // A Poisson degree distribution has variance equal to its mean.
  EXPECT_GT(ratio, 3.0);
}

TEST(DcSbm, ExpectedEdgeCountMonteCarlo) {
  Rng rng(4);
  auto t = power_law_propensities(300, 2.5, 1.0, 20.0, rng);
  const auto spec = DcSbmSpec::with_expected_degrees(t, 3, 0.2);
  const int seeds = 200;
  double sum = 0.0;
  for (int s = 0; s < seeds; ++s) sum += generate_dcsbm(spec, s).first.num_edges();
  // Var(L) <= E[L] for independent Bernoulli pairs.
  EXPECT_LT(std::abs(sum / seeds - expected_edge_count(spec)), 3.0 * std::sqrt(expected_edge_count(spec) / seeds));
}

TEST(DcSbm, ZeroAffinityAndValidation) {
  DcSbmSpec spec;
  spec.n = 20;
  spec.q_planted = 2;
  spec.propensities.assign(20, 3.0);
  EXPECT_EQ(generate_dcsbm(spec, 1).first.num_edges(), 0);
  spec.propensities[3] = -1.0;
  EXPECT_THROW(generate_dcsbm(spec, 1), DomainError);
  spec.propensities.pop_back();
  EXPECT_THROW(generate_dcsbm(spec, 1), DomainError);
}

TEST(DcSbm, Determinism) {
  Rng rng(2);
  const auto spec = DcSbmSpec::with_expected_degrees(power_law_propensities(200, 2.0, 2.0, 30.0, rng), 2, 0.2);
  EXPECT_EQ(generate_dcsbm(spec, 77).first, generate_dcsbm(spec, 77).first);
  EXPECT_FALSE(generate_dcsbm(spec, 77).first == generate_dcsbm(spec, 78).first);
}

#include "morl/oracle.hpp"

#include <gtest/gtest.h>

#include <chrono>

using namespace morl;

namespace {

TabularMomdp bandit(const std::vector<Vector>& arms, double gamma) {
  TabularMomdp m;
  m.num_states = 1;
  m.num_actions = static_cast<int>(arms.size());
  m.num_objectives = arms.front().size();
  m.gamma = gamma;
  m.initial_distribution = Vector::Ones(1);
  for (const auto& r : arms) {
    m.transitions.push_back(Vector::Ones(1));
    m.rewards.push_back(r);
  }
  return m;
}

bool weakly_dominated_by_other(const std::vector<Vector>& pts, std::size_t i) {
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j == i) continue;
    if ((pts[j].array() >= pts[i].array()).all() && (pts[j].array() > pts[i].array()).any()) return true;
  }
  return false;
}

bool contains_point(const ParetoSet& set, const Vector& p) { return set.contains(p, 1e-12); }

}  // namespace

TEST(EnumerateReturns, CountsAndOrder) {
  const TabularMomdp m = make_random_tabular_momdp(2, 3, 2, 2, 0.9);
  const auto all = enumerate_returns(m);
  ASSERT_EQ(all.size(), 8u);
  EXPECT_EQ(all.front().policy, (PolicyTable{0, 0, 0}));
  EXPECT_EQ(all[1].policy, (PolicyTable{0, 0, 1}));
  EXPECT_EQ(all.back().policy, (PolicyTable{1, 1, 1}));
  EXPECT_EQ(enumerate_returns(make_random_tabular_momdp(2, 4, 3, 3, 0.9)).size(), 81u);
}

TEST(EnumerateReturns, GuardsAgainstExplosion) {
  EXPECT_THROW(enumerate_returns(make_random_tabular_momdp(1, 11, 3, 2, 0.9)), UsageError);
}

TEST(EnumerateReturns, SingleStateIsGeometric) {
  const auto all = enumerate_returns(bandit({Vector{{1.0, 2.0}}, Vector{{3.0, 0.0}}}, 0.5));
  EXPECT_LE((all[0].value - Vector{{2.0, 4.0}}).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((all[1].value - Vector{{6.0, 0.0}}).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EnumerateReturns, AgreesWithDeterministicRollouts) {
  // Deterministic transitions make a truncated rollout an exact oracle.
  TabularMomdp m;
  m.num_states = 2;
  m.num_actions = 2;
  m.num_objectives = 2;
  m.gamma = 0.9;
  m.initial_distribution = Vector::Unit(2, 0);
  m.transitions = {Vector::Unit(2, 0), Vector::Unit(2, 1), Vector::Unit(2, 1), Vector::Unit(2, 0)};
  m.rewards = {Vector{{1.0, 0.0}}, Vector{{0.0, 0.5}}, Vector{{0.2, 0.2}}, Vector{{0.0, 1.0}}};
  for (const auto& pr : enumerate_returns(m)) {
    TabularEnv env(m, 1);
    const Trajectory t = rollout(env, [&](const Vector& obs) { return pr.policy[obs[0] > 0.5 ? 0 : 1]; });
    EXPECT_LE((discounted_return(t, m.gamma, 2) - pr.value).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ExactFront, MatchesQuadraticDominanceOracle) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const TabularMomdp m = make_random_tabular_momdp(seed, 2 + seed % 3, 2 + seed % 2, 2 + seed % 3, 0.9);
    std::vector<Vector> values;
    for (const auto& pr : enumerate_returns(m)) values.push_back(pr.value);
    const ParetoSet front = exact_pareto_front(m);
    for (std::size_t i = 0; i < values.size(); ++i)
      EXPECT_EQ(contains_point(front, values[i]), !weakly_dominated_by_other(values, i)) << seed << " " << i;
  }
}

TEST(ExactFront, BanditFrontIsTheUndominatedArms) {
  const ParetoSet front =
      exact_pareto_front(bandit({Vector{{1.0, 0.0}}, Vector{{0.4, 0.4}}, Vector{{0.5, 0.5}}, Vector{{0.0, 1.0}}}, 0.5));
  EXPECT_EQ(front.size(), 3u);
  EXPECT_FALSE(contains_point(front, Vector{{0.8, 0.8}}));
  EXPECT_TRUE(contains_point(front, Vector{{1.0, 1.0}}));
}

TEST(ExactCcs, SpecExamples) {
  const auto grid = equidistant_simplex_points(2, 100);
  const ParetoSet convex = pareto_filter({Vector{{2.0, 0.0}}, Vector{{1.4, 1.4}}, Vector{{0.0, 2.0}}});
  EXPECT_EQ(exact_ccs(convex, grid).size(), 3u);
  const ParetoSet concave = pareto_filter({Vector{{2.0, 0.0}}, Vector{{0.8, 0.8}}, Vector{{0.0, 2.0}}});
  const ParetoSet ccs = exact_ccs(concave, grid);
  EXPECT_EQ(ccs.size(), 2u);
  EXPECT_FALSE(contains_point(ccs, Vector{{0.8, 0.8}}));
}

TEST(ExactCcs, StableUnderGridRefinement) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ParetoSet front = exact_pareto_front(make_random_tabular_momdp(seed, 3, 3, 2, 0.9));
    const ParetoSet coarse = exact_ccs(front, equidistant_simplex_points(2, 200));
    const ParetoSet fine = exact_ccs(front, equidistant_simplex_points(2, 2000));
    // A refined grid can only add CCS points.
    for (const auto& p : coarse.points()) EXPECT_TRUE(contains_point(fine, p));
    EXPECT_LE(fine.size(), front.size());
  }
}

TEST(Theorem1, IdentityMatrixRecoversCcsPoints) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TabularMomdp m = make_random_tabular_momdp(seed, 3, 2, 2, 0.9);
    const auto grid = theorem1_weight_grid(2);
    const Theorem1Verdict v = verify_theorem1(m, Matrix::Identity(2, 2), grid);
    EXPECT_TRUE(v.passed());
    EXPECT_EQ(v.checks, 21u);
    const ParetoSet ccs = exact_ccs(exact_pareto_front(m), grid);
    for (const auto& w : grid) EXPECT_TRUE(ccs.contains(tabular_scalarized_solve(m, w).original_return, 1e-8));
  }
}

TEST(Theorem1, BiasDoesNotChangeTheScalarizedOptimum) {
  Rng rng = make_rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TabularMomdp m = make_random_tabular_momdp(seed, 3, 3, 4, 0.9);
    const Matrix a = random_reduction_matrix(MatrixFamily::PositiveRowStochastic, 2, 4, rng);
    const Vector b = Vector::Random(2) * 5.0;
    for (const auto& w : theorem1_weight_grid(2)) {
      const auto plain = tabular_scalarized_solve(m, w, [&](const Vector& r) { return Vector(a * r); });
      const auto shifted = tabular_scalarized_solve(m, w, [&](const Vector& r) { return Vector(a * r + b); });
      EXPECT_EQ(plain.policy, shifted.policy);
      EXPECT_NEAR(shifted.scalar_value - plain.scalar_value, w.dot(b) / (1.0 - m.gamma), 1e-8);
    }
    EXPECT_TRUE(verify_theorem1(m, a, theorem1_weight_grid(2), b).passed());
  }
}

TEST(Theorem1, MatrixFamilies) {
  Rng rng = make_rng(6);
  for (int i = 0; i < 100; ++i) {
    const Matrix p = random_reduction_matrix(MatrixFamily::PositiveRowStochastic, 3, 5, rng);
    EXPECT_GT(p.minCoeff(), 0.0);
    EXPECT_LE((p.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    const Matrix s = random_reduction_matrix(MatrixFamily::SignedRowStochastic, 3, 5, rng);
    EXPECT_LE((s.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  }
  EXPECT_EQ(theorem1_weight_grid(2).size(), 21u);
  EXPECT_EQ(theorem1_weight_grid(3).size(), 21u);
}

TEST(Theorem1, NegativeWeightCanPickADominatedPolicy) {
  // a2 dominates a1; the row (1.5, -0.5) still prefers a1.
  const TabularMomdp m = bandit({Vector{{1.0, 0.0}}, Vector{{1.0, 1.0}}}, 0.5);
  Matrix a(2, 2);
  a << 1.5, -0.5, 0.5, 0.5;
  const Theorem1Verdict v = verify_theorem1(m, a, {Vector{{1.0, 0.0}}});
  ASSERT_EQ(v.failures.size(), 1u);
  EXPECT_EQ(v.failures.front().policy, PolicyTable{0});
}

TEST(Theorem1Suite, PositiveFamilyHasNoFailures) {
  Theorem1SuiteConfig c;
  c.instances = 40;
  c.seed = 11;
  const Theorem1Verdict v = run_theorem1_suite(c);
  EXPECT_EQ(v.instances, 40u);
  EXPECT_EQ(v.checks, 40u * 21u);
  EXPECT_TRUE(v.passed()) << to_json(v).dump();
}

TEST(Theorem1Suite, SignedFamilyFindsFailures) {
  Theorem1SuiteConfig c;
  c.family = MatrixFamily::SignedRowStochastic;
  const Theorem1Verdict v = run_theorem1_suite(c);
  EXPECT_GE(v.failures.size(), 1u);
}

TEST(Theorem1Suite, DeterministicAndSerializable) {
  Theorem1SuiteConfig c;
  c.instances = 15;
  c.family = MatrixFamily::SignedRowStochastic;
  const auto a = to_json(run_theorem1_suite(c)).dump();
  const auto b = to_json(run_theorem1_suite(c)).dump();
  EXPECT_EQ(a, b);
  const auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j.at("instances"), 15);
  EXPECT_EQ(j.at("checks"), 15 * 21);
}

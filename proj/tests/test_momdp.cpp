#include "morl/momdp.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace morl;

namespace {

Trajectory make_traj(const std::vector<Vector>& rewards) {
  Trajectory t;
  for (std::size_t i = 0; i < rewards.size(); ++i) t.push_back({0, 0, rewards[i], 0, i + 1 == rewards.size()});
  return t;
}

/// 1 state, `actions` self-loop actions with the given rewards.
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

}  // namespace

TEST(DiscountedReturn, SpecExamples) {
  EXPECT_EQ(discounted_return(make_traj({Vector{{1.0, 0.0}}, Vector{{0.0, 1.0}}}), 0.5, 2), Vector(Vector{{1.0, 0.5}}));
  EXPECT_EQ(discounted_return({}, 0.9, 3), Vector(Vector::Zero(3)));
  EXPECT_EQ(discounted_return(make_traj({Vector{{2.0, 5.0}}, Vector{{9.0, 9.0}}}), 0.0, 2), Vector(Vector{{2.0, 5.0}}));
}

TEST(DiscountedReturn, MixedDimensionsAreUsageError) {
  EXPECT_THROW(discounted_return(make_traj({Vector{{1.0, 0.0}}, Vector{{1.0, 0.0, 0.0}}}), 0.5, 2), UsageError);
}

TEST(DiscountedReturn, IsLinearInTheRewardStream) {
  Rng rng = make_rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vector> a, b, sum;
    for (int t = 0; t < 30; ++t) {
      a.push_back(Vector::Random(3));
      b.push_back(Vector::Random(3));
      sum.push_back(a.back() + b.back());
    }
    const Vector lhs = discounted_return(make_traj(sum), 0.93, 3);
    const Vector rhs = discounted_return(make_traj(a), 0.93, 3) + discounted_return(make_traj(b), 0.93, 3);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TruncationHorizon, GammaPowerFallsBelowThreshold) {
  for (double g : {0.5, 0.9, 0.99}) {
    const int h = truncation_horizon(g);
    EXPECT_LT(std::pow(g, h), 1e-8);
    EXPECT_GT(std::pow(g, h - 2), 1e-8);  // one step of slack past the crossing
  }
}

TEST(RandomTabular, DeterministicAndWellFormed) {
  const TabularMomdp a = make_random_tabular_momdp(1, 2, 2, 3, 0.9);
  const TabularMomdp b = make_random_tabular_momdp(1, 2, 2, 3, 0.9);
  ASSERT_EQ(a.transitions.size(), b.transitions.size());
  for (std::size_t i = 0; i < a.transitions.size(); ++i) {
    EXPECT_EQ(a.transitions[i], b.transitions[i]);
    EXPECT_EQ(a.rewards[i], b.rewards[i]);
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const TabularMomdp m = make_random_tabular_momdp(seed, 4, 3, 5, 0.95);
    EXPECT_NO_THROW(m.validate());
    EXPECT_EQ(m.rewards.size(), 12u);
    for (const auto& row : m.transitions) EXPECT_NEAR(row.sum(), 1.0, 1e-9);
    for (const auto& r : m.rewards) {
      EXPECT_EQ(r.size(), 5);
      EXPECT_GE(r.minCoeff(), 0.0);
      EXPECT_LE(r.maxCoeff(), 1.0);
    }
  }
}

TEST(RandomTabular, SingleObjectiveIsUsageError) { EXPECT_THROW(make_random_tabular_momdp(1, 2, 2, 1, 0.9), UsageError); }

TEST(TabularMomdp, ValidateRejectsBrokenTables) {
  TabularMomdp m = bandit({Vector{{1.0, 0.0}}}, 0.9);
  EXPECT_NO_THROW(m.validate());
  m.transitions[0][0] = 0.5;
  EXPECT_THROW(m.validate(), UsageError);
  m = bandit({Vector{{1.0, 0.0}}}, 1.0);
  EXPECT_THROW(m.validate(), UsageError);
}

TEST(TabularEnv, ResetStepAndErrors) {
  TabularEnv env(bandit({Vector{{1.0, 0.0}}, Vector{{0.0, 1.0}}}, 0.9), 3, 5);
  const Vector obs = env.reset();
  EXPECT_EQ(env.state_id(), 0);
  EXPECT_EQ(obs, Vector(Vector::Ones(1)));
  const StepResult r = env.step(0);
  EXPECT_EQ(r.reward, Vector(Vector{{1.0, 0.0}}));
  EXPECT_THROW(env.step(2), UsageError);
  EXPECT_THROW(env.step(-1), UsageError);
  for (int i = 0; i < 4; ++i) env.step(1);
  EXPECT_THROW(env.step(0), UsageError);
}

TEST(TabularEnv, SeededRolloutsAreIdentical) {
  const TabularMomdp m = make_random_tabular_momdp(4, 4, 3, 3, 0.9);
  auto run = [&] {
    TabularEnv env(m, 17, 50);
    int step = 0;
    return rollout(env, [&](const Vector&) { return (step++ * 7) % 3; });
  };
  const Trajectory a = run(), b = run();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].state, b[i].state);
    EXPECT_EQ(a[i].reward, b[i].reward);
  }
  EXPECT_TRUE(a.back().done);
  for (std::size_t i = 0; i + 1 < a.size(); ++i) EXPECT_FALSE(a[i].done);
}

TEST(PolicyEvaluation, GeometricSeriesOnABandit) {
  const TabularMomdp m = bandit({Vector{{1.0, 0.0}}, Vector{{0.0, 2.0}}}, 0.9);
  EXPECT_LE((evaluate_policy(m, {0}).initial - Vector{{10.0, 0.0}}).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((evaluate_policy(m, {1}).initial - Vector{{0.0, 20.0}}).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PolicyEvaluation, MatchesLongRolloutAverage) {
  // Monte Carlo over truncated rollouts: standard error ~ 1/sqrt(n) * spread.
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const TabularMomdp m = make_random_tabular_momdp(seed, 3, 2, 2, 0.8);
    const std::vector<int> policy{1, 0, 1};
    const Vector exact = evaluate_policy(m, policy).initial;
    TabularEnv env(m, seed + 100);
    Vector total = Vector::Zero(2);
    const int episodes = 4000;
    for (int e = 0; e < episodes; ++e) {
      const Trajectory t = rollout(env, [&](const Vector& obs) {
        Index s = 0;
        obs.maxCoeff(&s);
        return policy[static_cast<std::size_t>(s)];
      });
      total += discounted_return(t, m.gamma, 2);
    }
    EXPECT_LE((total / episodes - exact).cwiseAbs().maxCoeff(), 2e-2) << seed;
  }
}

TEST(PolicyEvaluation, DeterministicChainMatchesTruncatedSum) {
  // Deterministic transitions: a single rollout is exact up to truncation.
  TabularMomdp m;
  m.num_states = 3;
  m.num_actions = 1;
  m.num_objectives = 2;
  m.gamma = 0.95;
  m.initial_distribution = Vector::Unit(3, 0);
  for (int s = 0; s < 3; ++s) {
    m.transitions.push_back(Vector::Unit(3, (s + 1) % 3));
    m.rewards.push_back(Vector{{double(s), 1.0 - s}});
  }
  TabularEnv env(m, 1);
  const Trajectory t = rollout(env, [](const Vector&) { return 0; });
  EXPECT_LE((discounted_return(t, m.gamma, 2) - evaluate_policy(m, {0, 0, 0}).initial).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Traffic, EmptyStartAndDimensions) {
  TrafficQueueEnv env({}, 7);
  const Vector obs = env.reset();
  EXPECT_EQ(env.reward_dim(), 16);
  EXPECT_EQ(env.num_actions(), 4);
  EXPECT_EQ(obs.size(), 20);
  EXPECT_TRUE(env.accumulators().isZero(0.0));
  EXPECT_TRUE(obs.tail(16).isZero(0.0));
}

TEST(Traffic, NoArrivalsMeansZeroRewardForever) {
  TrafficConfig c;
  c.arrival_rates.fill(0.0);
  TrafficQueueEnv env(c, 1);
  env.reset();
  for (int t = 0; t < c.episode_length; ++t) EXPECT_TRUE(env.step(t % 4).reward.isZero(0.0));
}

TEST(Traffic, RewardsNonPositiveUnderRandomPolicies) {
  TrafficQueueEnv env({}, 3);
  Rng rng = make_rng(4);
  for (int episode = 0; episode < 5; ++episode) {
    const Trajectory t = rollout(env, [&](const Vector&) { return std::uniform_int_distribution<int>(0, 3)(rng); });
    for (const auto& s : t) EXPECT_LE(s.reward.maxCoeff(), 0.0);
    EXPECT_EQ(t.size(), 200u);
  }
}

TEST(Traffic, SeededTrajectoriesAreIdentical) {
  auto run = [] {
    TrafficQueueEnv env({}, 99);
    int step = 0;
    return rollout(env, [&](const Vector&) { return (step++ / 3) % 4; });
  };
  const Trajectory a = run(), b = run();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].reward, b[i].reward);
}

TEST(Traffic, ServingAPhaseDrainsOnlyItsLanes) {
  TrafficQueueEnv env({}, 5);
  env.reset();
  for (int t = 0; t < 30; ++t) env.step(0);  // lanes of phases 1-3 pile up
  const Vector held = env.accumulators();
  const auto& map = lane_phase_map();
  for (int k = 0; k < 16; ++k) {
    if (map[k] != 0) EXPECT_GT(held[k], 0.0) << k;
  }
  // Phase 0 lanes are served every step; their backlog stays small.
  double served = 0.0, starved = 0.0;
  for (int k = 0; k < 16; ++k) (map[k] == 0 ? served : starved) += held[k];
  EXPECT_LT(served, starved);
}

TEST(Traffic, ErrorsOnBadActionAndFinishedEpisode) {
  TrafficConfig c;
  c.episode_length = 2;
  TrafficQueueEnv env(c, 1);
  env.reset();
  EXPECT_THROW(env.step(4), UsageError);
  env.step(0);
  EXPECT_TRUE(env.step(0).done);
  EXPECT_THROW(env.step(0), UsageError);
}

TEST(TrajectoryCsv, Columns) {
  const Trajectory t{{2, 1, Vector{{0.5, -1.0}}, 3, true}};
  std::ostringstream os;
  write_trajectory_csv(os, t);
  EXPECT_EQ(os.str(), "step,state_id,action,r_1,r_2\n0,2,1,0.5,-1\n");
}

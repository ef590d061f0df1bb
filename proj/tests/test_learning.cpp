#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <algorithm>

#include "helpers.hpp"
#include "uavgame/learning.hpp"
#include "uavgame/scenarios.hpp"

using namespace uavgame;
using test::Fixture;

TEST(KeepProbability, Examples) {
  EXPECT_DOUBLE_EQ(boltzmann_keep_probability(1.0, 1.0, 0.01), 0.5);
  EXPECT_NEAR(boltzmann_keep_probability(0.0, 0.0461, 0.01), 0.990146, 5e-7);
  EXPECT_NEAR(boltzmann_keep_probability(0.0, 0.0461, 0.01), 1.0 / (1.0 + std::exp(-4.61)), 1e-15);
  EXPECT_EQ(boltzmann_keep_probability(0.0, 500.0, 0.01), 1.0);
  EXPECT_EQ(boltzmann_keep_probability(500.0, 0.0, 0.01), 0.0);
  const double keep = boltzmann_keep_probability(0.3, 0.1, 0.05);
  EXPECT_NEAR(keep + boltzmann_keep_probability(0.1, 0.3, 0.05), 1.0, 1e-15);
}

TEST(KeepProbability, RejectsBadInput) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(boltzmann_keep_probability(nan, 0.0, 0.01), std::domain_error);
  EXPECT_THROW(boltzmann_keep_probability(0.0, inf, 0.01), std::domain_error);
  EXPECT_THROW(boltzmann_keep_probability(0.0, 0.0, 0.0), std::domain_error);
}

TEST(AlteringProbability, Examples) {
  EXPECT_NEAR(altering_probability(0.01, 0.03), 0.049787, 5e-7);
  EXPECT_EQ(altering_probability(0.01, 0.0), 1.0);
  EXPECT_NEAR(altering_probability(0.01, 0.046052), 0.010000, 5e-7);
  EXPECT_THROW(altering_probability(0.0, 1.0), std::domain_error);
  EXPECT_THROW(altering_probability(0.01, -1.0), std::domain_error);
}

TEST(DeltaBound, Tiny2Terms) {
  const DeltaBound d = delta_bound(scenarios::tiny2());
  EXPECT_DOUBLE_EQ(d.terms[0], 1.0);
  EXPECT_DOUBLE_EQ(d.terms[1], 0.5);
  EXPECT_EQ(d.terms[2], 0.0);
  EXPECT_EQ(d.terms[3], 0.0);
  EXPECT_EQ(d.terms[4], 0.0);
  EXPECT_NEAR(d.terms[5], 0.094248, 5e-7);
  EXPECT_NEAR(d.total, 1.594248, 5e-7);
  EXPECT_NEAR(d.minimum_m, 3.188496, 5e-7);
  double sum = 0.0;
  for (double t : d.terms) sum += t;
  EXPECT_EQ(d.total, sum);
}

TEST(DeltaBound, FieldScenarioTerms) {
  const DeltaBound d = delta_bound(scenarios::field());
  EXPECT_NEAR(d.terms[0], 0.002 * 5 * 0.025 / (5 * 0.025 * 0.05), 1e-15);  // 0.04
  EXPECT_NEAR(d.terms[1], 0.005 * 10 * 5 * 0.025, 1e-15);                   // 0.00625
  EXPECT_NEAR(d.terms[2], 0.005 * 10 * 0.002 * 0.025 * 5 * 24, 1e-15);      // 0.0003
  EXPECT_NEAR(d.total, 0.046602, 5e-7);
}

TEST(DeltaBound, OnlyTurbulenceTermWithoutPowerMovesOrCoupling) {
  GameConfig c = scenarios::tiny2();
  c.power_levels = {1.0};
  const DeltaBound d = delta_bound(c);
  EXPECT_EQ(d.total, d.terms[5]);
  EXPECT_NEAR(d.total, 0.03 * std::numbers::pi, 1e-15);
}

TEST(MBound, GuardedWithOverride) {
  const GameConfig c = scenarios::tiny2();
  LearnerParams p;
  p.m = 3.0;
  EXPECT_THROW(check_m_bound(c, p), BoundViolation);
  p.m = 3.2;
  EXPECT_NO_THROW(check_m_bound(c, p));
  p.m = 0.1;
  p.allow_m_below_bound = true;
  EXPECT_NO_THROW(check_m_bound(c, p));

  const Fixture f(c);
  p.allow_m_below_bound = false;
  EXPECT_THROW(Learner(Algorithm::spblla, f.game, f.deployed, p), BoundViolation);
  EXPECT_NO_THROW(Learner(Algorithm::pblla, f.game, f.deployed, p));
}

TEST(Pblla, ExploreThenResolve) {
  const Fixture f(scenarios::coupled_three(), 2);
  LearnerState s = initial_state(f.game, f.deployed);
  Rng rng(11);
  for (int round = 0; round < 500; ++round) {
    const StrategyProfile before = s.current;
    pblla_step(s, f.game, 0.05, rng);
    ASSERT_EQ(s.active_flags(), 1u);
    std::size_t i = 0;
    while (!s.exploring[i]) ++i;
    const auto nb = neighbor_set(f.game.config(), before[i]);
    EXPECT_NE(std::find(nb.begin(), nb.end(), s.current[i]), nb.end());
    for (std::size_t j = 0; j < before.size(); ++j)
      if (j != i) {
        EXPECT_EQ(s.current[j], before[j]);
      }
    const Strategy trial = s.current[i];

    pblla_step(s, f.game, 0.05, rng);
    EXPECT_EQ(s.active_flags(), 0u);
    EXPECT_TRUE(s.current[i] == trial || s.current[i] == before[i]);
    for (std::size_t j = 0; j < before.size(); ++j) EXPECT_EQ(s.current[j].channels, f.deployed[j].channels);
  }
}

TEST(Pblla, RevertsAtZeroTemperatureWhenTrialIsWorse) {
  const Fixture f(scenarios::tiny2());
  const StrategyProfile before = f.at({{0, 1}, {0, 1}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    LearnerState s = initial_state(f.game, f.at({{1, 0}, {0, 1}}));
    s.previous = before;
    s.exploring[0] = 1;
    s.payoff_prev[0] = 1.0;
    s.payoff_curr[0] = 0.9;
    Rng rng(seed);
    pblla_step(s, f.game, 1e-6, rng);
    EXPECT_EQ(s.current, before);
    EXPECT_EQ(s.exploring[0], 0);
  }
}

TEST(Spblla, ZeroAlteringProbabilityIsAFixedPoint) {
  const Fixture f(scenarios::coupled_three(), 3);
  LearnerState s = initial_state(f.game, f.deployed);
  Rng rng(5);
  for (int k = 0; k < 1000; ++k) spblla_step(s, f.game, 0.01, 0.0, rng);
  EXPECT_EQ(s.current, f.deployed);
  EXPECT_EQ(s.active_flags(), 0u);
}

TEST(Spblla, NewFlagsFollowBinomialMean) {
  const Fixture f(scenarios::tiny2());
  const LearnerState clear = initial_state(f.game, f.deployed);
  Rng rng(17);
  const int steps = 100000;
  const double omega = 0.05;
  double flagged = 0.0;
  for (int k = 0; k < steps; ++k) {
    LearnerState s = clear;
    spblla_step(s, f.game, 0.01, omega, rng);
    flagged += static_cast<double>(s.active_flags());
  }
  const double mean = flagged / steps;
  const double se = std::sqrt(2.0 * omega * (1.0 - omega) / steps);
  EXPECT_NEAR(mean, 2.0 * omega, 3.0 * se);
}

TEST(Spblla, ExploringUavsAlwaysResolve) {
  const Fixture f(scenarios::coupled_three(), 4);
  LearnerState s = initial_state(f.game, f.deployed);
  Rng rng(23);
  for (int k = 0; k < 5000; ++k) {
    const LearnerState before = s;
    spblla_step(s, f.game, 0.05, 0.3, rng);
    for (std::size_t i = 0; i < s.current.size(); ++i) {
      if (before.exploring[i]) {
        EXPECT_EQ(s.exploring[i], 0);
        EXPECT_TRUE(s.current[i] == before.current[i] || s.current[i] == before.previous[i]);
      } else if (s.exploring[i]) {
        const auto nb = neighbor_set(f.game.config(), before.current[i]);
        EXPECT_NE(std::find(nb.begin(), nb.end(), s.current[i]), nb.end());
        // Observed payoffs: recorded under the live profiles before and after the step.
        EXPECT_NEAR(s.payoff_prev[i], utility(f.game, before.current, i).total, 1e-12);
        EXPECT_NEAR(s.payoff_curr[i], utility(f.game, s.current, i).total, 1e-12);
      } else {
        EXPECT_EQ(s.current[i], before.current[i]);
      }
    }
  }
}

TEST(Learner, IncrementalTotalsTrackExactTotals) {
  const GameConfig c = scenarios::desk(10);
  const Fixture f(c, 8);
  LearnerParams p;
  p.tau = 0.01;
  p.m = 1.05 * delta_bound(c).minimum_m;
  p.seed = 8;
  Learner learner(Algorithm::spblla, f.game, f.deployed, p);
  for (int k = 0; k < 5000; ++k) {
    learner.step();
    const ProfileTotals exact = profile_totals(f.game, learner.state().current);
    for (std::size_t n = 0; n < exact.channel_load.size(); ++n)
      ASSERT_NEAR(learner.state().totals.channel_load[n], exact.channel_load[n], 1e-12);
    ASSERT_NEAR(learner.state().totals.coverage_sum, exact.coverage_sum, 1e-9);
  }
}

TEST(Learner, PbllaFlagsNeverExceedOne) {
  const Fixture f(scenarios::coupled_three(), 6);
  LearnerParams p;
  p.tau = 0.02;
  p.seed = 6;
  Learner learner(Algorithm::pblla, f.game, f.deployed, p);
  for (int k = 0; k < 20000; ++k) {
    learner.step();
    ASSERT_LE(learner.state().active_flags(), 1u);
  }
}

TEST(RunLearning, TrajectoryLengthAndDeterminism) {
  LearnerParams p;
  p.tau = 0.02;
  p.max_iterations = 1000;
  p.seed = 4;
  const RunRecord a = run_learning(Algorithm::pblla, scenarios::coupled_three(), p, {}, 7);
  const RunRecord b = run_learning(Algorithm::pblla, scenarios::coupled_three(), p, {}, 7);
  EXPECT_EQ(a.trajectory.size(), 1u + 1000u / 7u);
  EXPECT_EQ(a.trajectory, b.trajectory);
  EXPECT_EQ(a.final_profile, b.final_profile);
  EXPECT_EQ(a.rng_draws, b.rng_draws);
  for (std::size_t k = 1; k < a.trajectory.size(); ++k)
    EXPECT_GT(a.trajectory[k].iteration, a.trajectory[k - 1].iteration);
}

TEST(RunLearning, ZeroIterationsRecordsOnlyTheStart) {
  LearnerParams p;
  p.max_iterations = 0;
  const RunRecord r = run_learning(Algorithm::pblla, scenarios::tiny2(), p);
  ASSERT_EQ(r.trajectory.size(), 1u);
  EXPECT_EQ(r.trajectory[0].iteration, 0u);
  EXPECT_EQ(r.final_profile, r.initial_profile);
  EXPECT_EQ(r.rng_draws, 0u);
}

TEST(RunLearning, RejectsBoundViolation) {
  LearnerParams p;
  p.m = 1.0;
  p.max_iterations = 10;
  EXPECT_THROW(run_learning(Algorithm::spblla, scenarios::tiny2(), p), BoundViolation);
}

TEST(TauSchedule, PiecewiseConstant) {
  const TauSchedule s{{{100, 0.05}, {1000, 0.02}}};
  EXPECT_EQ(s.at(0, 0.1), 0.1);
  EXPECT_EQ(s.at(99, 0.1), 0.1);
  EXPECT_EQ(s.at(100, 0.1), 0.05);
  EXPECT_EQ(s.at(5000, 0.1), 0.02);
  EXPECT_EQ(TauSchedule{}.at(7, 0.3), 0.3);
}

TEST(TauSchedule, ChangesTheRun) {
  LearnerParams p;
  p.tau = 0.05;
  p.max_iterations = 2000;
  p.seed = 2;
  const auto flat = run_learning(Algorithm::pblla, scenarios::coupled_three(), p);
  const auto annealed = run_learning(Algorithm::pblla, scenarios::coupled_three(), p, TauSchedule{{{500, 0.001}}});
  EXPECT_EQ(std::vector(flat.trajectory.begin(), flat.trajectory.begin() + 500),
            std::vector(annealed.trajectory.begin(), annealed.trajectory.begin() + 500));
  EXPECT_NE(flat.trajectory, annealed.trajectory);
}

// The committed chain spends half its steps at rest in every profile, so the
// per-visit transition frequency ratio between two adjacent profiles is the
// ratio of keep probabilities, exp(dphi / tau).
TEST(DetailedBalance, AdjacentProfilesOnTiny2) {
  const Fixture f(scenarios::tiny2());
  const auto s = f.at({{0, 0}, {0, 1}});
  const auto t = f.at({{0, 1}, {0, 1}});
  const double tau = 0.05;
  LearnerParams p;
  p.tau = tau;
  p.seed = 99;
  Learner learner(Algorithm::pblla, f.game, f.deployed, p);
  std::map<std::pair<bool, bool>, std::uint64_t> moves;
  std::uint64_t at_s = 0, at_t = 0;
  StrategyProfile prev = learner.state().committed_profile();
  for (int k = 0; k < 4'000'000; ++k) {
    learner.step();
    const StrategyProfile now = learner.state().committed_profile();
    if (prev == s) {
      ++at_s;
      if (now == t) ++moves[{true, false}];
    } else if (prev == t) {
      ++at_t;
      if (now == s) ++moves[{false, true}];
    }
    prev = now;
  }
  const double forward = static_cast<double>(moves[{true, false}]) / static_cast<double>(at_s);
  const double backward = static_cast<double>(moves[{false, true}]) / static_cast<double>(at_t);
  const double dphi = potential(f.game, t) - potential(f.game, s);
  const double expected = std::exp(dphi / tau);
  EXPECT_NEAR(forward / backward, expected, 0.10 * expected);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "helpers.hpp"
#include "uavgame/oracle.hpp"
#include "uavgame/scenarios.hpp"

using namespace uavgame;
using test::Fixture;

namespace {

ProfileSpace space_of(const Fixture& f, EnumerationBudget budget = {}) {
  return ProfileSpace(f.game, channel_assignment(f.deployed), budget);
}

bool contains(const std::vector<ProfileId>& v, ProfileId id) {
  return std::find(v.begin(), v.end(), id) != v.end();
}

}  // namespace

TEST(ProfileSpace, SizesAndBudget) {
  const Fixture tiny(scenarios::tiny2());
  EXPECT_EQ(space_of(tiny).size(), 16u);

  GameConfig one = scenarios::single_uav();
  one.power_levels = {0.5, 0.75, 1.0};
  one.altitude_levels = {1.0, 2.0};
  one.turbulence = {1.0, 0.9};
  const Fixture single(one);
  EXPECT_EQ(space_of(single).size(), 6u);

  GameConfig wide = scenarios::tiny2();
  wide.altitude_levels = {1.0, 1.5, 2.0};
  wide.turbulence = {1.0, 1.0, 1.0};
  const Fixture f(wide);
  EXPECT_THROW(space_of(f, EnumerationBudget{10}), BudgetExceeded);
  EXPECT_EQ(space_of(f, EnumerationBudget{36}).size(), 36u);
}

TEST(ProfileSpace, LexicographicOrderWithFirstUavMostSignificant) {
  const Fixture f(scenarios::tiny2());
  const ProfileSpace space = space_of(f);
  EXPECT_EQ(space.decode(0), f.at({{0, 0}, {0, 0}}));
  EXPECT_EQ(space.decode(1), f.at({{0, 0}, {0, 1}}));
  EXPECT_EQ(space.decode(2), f.at({{0, 0}, {1, 0}}));
  EXPECT_EQ(space.decode(4), f.at({{0, 1}, {0, 0}}));
  EXPECT_EQ(space.decode(15), f.at({{1, 1}, {1, 1}}));
}

TEST(ProfileSpace, EncodeDecodeAndIterationAgree) {
  const Fixture f(scenarios::coupled_three(), 2);
  const ProfileSpace space = space_of(f);
  EXPECT_EQ(space.size(), 729u);
  ProfileId expected = 0;
  for (auto it = space.begin(); it != space.end(); ++it, ++expected) {
    ASSERT_EQ(it.id(), expected);
    ASSERT_EQ(space.encode(*it), expected);
    ASSERT_EQ(space.decode(expected), *it);
    ASSERT_TRUE(profile_violation(f.game.config(), *it).empty());
  }
  EXPECT_EQ(expected, space.size());
}

TEST(Psne, UniqueOnTiny2) {
  const Fixture f(scenarios::tiny2());
  const ProfileSpace space = space_of(f);
  const PsneReport psne = brute_force_psne(space);
  const ProfileId best = space.encode(f.at({{0, 1}, {0, 1}}));
  EXPECT_EQ(best, 5u);
  EXPECT_EQ(psne.full, std::vector<ProfileId>{best});
  EXPECT_EQ(psne.local, std::vector<ProfileId>{best});
}

TEST(Maximizers, Tiny2Value) {
  const Fixture f(scenarios::tiny2());
  const MaximizerSet max = phi_maximizers(space_of(f));
  EXPECT_EQ(max.profiles, std::vector<ProfileId>{5});
  EXPECT_NEAR(max.value, 5.251327, 5e-7);
}

TEST(Maximizers, ContainedInPsneAcrossConfigs) {
  for (const auto& config : {scenarios::tiny2(), scenarios::coupled_tiny(), scenarios::coupled_three(),
                             scenarios::single_uav(), scenarios::errata()}) {
    const Fixture f(config, 3);
    const ProfileSpace space = space_of(f);
    const PsneReport psne = brute_force_psne(space);
    const MaximizerSet max = phi_maximizers(space);
    ASSERT_FALSE(psne.full.empty());
    ASSERT_FALSE(max.profiles.empty());
    for (ProfileId id : max.profiles) {
      EXPECT_TRUE(contains(psne.full, id));
      EXPECT_TRUE(contains(psne.local, id));
    }
    for (ProfileId id : psne.full) EXPECT_TRUE(contains(psne.local, id));
  }
}

TEST(Maximizers, ClosedUnderSwappingIdenticalUavs) {
  const Fixture f(scenarios::coupled_tiny());
  const ProfileSpace space = space_of(f);
  const MaximizerSet max = phi_maximizers(space);
  for (ProfileId id : max.profiles) {
    const ProfileId swapped = space.with_level(space.with_level(id, 0, space.level_of(id, 1)), 1,
                                               space.level_of(id, 0));
    EXPECT_TRUE(contains(max.profiles, swapped));
  }
}

// Every cross-UAV term cancels in unilateral differences, so the maximizer
// picks each UAV's best own-strategy term independently.
TEST(Maximizers, SeparateIntoPerUavArgmax) {
  const Fixture f(scenarios::coupled_three(), 4);
  const ProfileSpace space = space_of(f);
  ProfileId expected = 0;
  StrategyProfile best = f.deployed;
  for (std::size_t i = 0; i < space.uav_count(); ++i) {
    double top = -1e300;
    for (std::uint64_t lvl = 0; lvl < space.levels_per_uav(); ++lvl) {
      const double v = own_strategy_term(f.game, space.strategy(i, lvl));
      if (v > top) {
        top = v;
        best[i] = space.strategy(i, lvl);
      }
    }
  }
  expected = space.encode(best);
  EXPECT_EQ(phi_maximizers(space).profiles, std::vector<ProfileId>{expected});
  EXPECT_EQ(brute_force_psne(space).full, std::vector<ProfileId>{expected});
}

TEST(MaxUnilateralDelta, Tiny2) {
  const Fixture f(scenarios::tiny2());
  const double mud = max_unilateral_delta(space_of(f));
  EXPECT_NEAR(mud, 0.594248, 5e-7);
  const double move = utility(f.game, f.at({{0, 1}, {0, 0}}), 0).total -
                      utility(f.game, f.at({{1, 0}, {0, 0}}), 0).total;
  EXPECT_NEAR(move, mud, 1e-14);
}

TEST(MaxUnilateralDelta, ZeroWithoutMoves) {
  GameConfig c = scenarios::tiny2();
  c.power_levels = {1.0};
  c.altitude_levels = {1.0};
  c.turbulence = {1.0};
  const Fixture f(c);
  EXPECT_EQ(max_unilateral_delta(space_of(f)), 0.0);
}

TEST(MaxUnilateralDelta, BoundedByDelta) {
  for (const auto& config : {scenarios::tiny2(), scenarios::coupled_tiny(), scenarios::coupled_three(),
                             scenarios::single_uav(), scenarios::errata()}) {
    const Fixture f(config, 7);
    EXPECT_LE(max_unilateral_delta(space_of(f)), delta_bound(config).total);
  }
}

TEST(PotentialCheck, BothVariantsExactWithoutCoupling) {
  const PotentialCheck c = exact_potential_check(scenarios::tiny2(), 1000, 1);
  EXPECT_TRUE(c.exhaustive);
  EXPECT_EQ(c.moves, 2u * 4u * 3u * 4u);
  EXPECT_LE(c.exact_abs, 1e-12);
  EXPECT_LE(c.printed_abs, 1e-12);
}

TEST(PotentialCheck, PrintedVariantOffByClosedForm) {
  const PotentialCheck c = exact_potential_check(scenarios::errata(), 1000, 3);
  EXPECT_FALSE(c.exhaustive);
  EXPECT_EQ(c.moves, 1000u);
  EXPECT_LE(c.exact_rel, 1e-12);
  EXPECT_GT(c.printed_abs, 1e-6);
  EXPECT_LE(c.closed_form_rel, 1e-9);
  EXPECT_NEAR(c.worst_printed_discrepancy, c.worst_printed_predicted,
              1e-9 * std::abs(c.worst_printed_predicted));
}

TEST(PotentialCheck, ClosedFormOnHandMove) {
  const Fixture f(scenarios::coupled_tiny());
  const auto from = f.at({{0, 0}, {1, 1}})[0];
  const auto to = f.at({{1, 1}, {1, 1}})[0];
  // mu = 1, so only the coverage term remains: B alpha kappa (M - 1) dD.
  const double dd = std::numbers::pi * (4.0 - 1.0);
  EXPECT_NEAR(printed_potential_discrepancy(f.game, from, to), 0.05 * 1e-3 * dd, 1e-15);
}

TEST(PotentialCheck, ExhaustiveOverloadMatchesDeployedCheck) {
  const Fixture f(scenarios::coupled_three(), 9);
  const ProfileSpace space = space_of(f);
  const PotentialCheck full = exact_potential_check(space);
  EXPECT_EQ(full.moves, unilateral_move_count(space));
  const PotentialCheck via_config = exact_potential_check(scenarios::coupled_three(), full.moves, 9);
  EXPECT_TRUE(via_config.exhaustive);
  EXPECT_EQ(via_config.moves, full.moves);
  EXPECT_EQ(via_config.exact_abs, full.exact_abs);
  EXPECT_EQ(via_config.printed_abs, full.printed_abs);
}

TEST(Gth, TwoStateChain) {
  const double a = 0.3, b = 0.1;
  const auto pi = detail::gth_stationary({{1 - a, a}, {b, 1 - b}});
  EXPECT_NEAR(pi[0], b / (a + b), 1e-15);
  EXPECT_NEAR(pi[1], a / (a + b), 1e-15);
}

TEST(Gth, ExtremeRatesKeepFullRelativeAccuracy) {
  const double a = 1e-300, b = 0.5;
  const auto pi = detail::gth_stationary({{1 - a, a}, {b, 1 - b}});
  EXPECT_EQ(pi[0], 1.0);
  EXPECT_NEAR(pi[1] / 2e-300, 1.0, 1e-12);
}

TEST(Gth, ReducibleChainThrows) {
  EXPECT_THROW(detail::gth_stationary({{1.0, 0.0}, {0.0, 1.0}}), std::domain_error);
}

TEST(Occupancy, NearUniformAtHighTemperature) {
  LearnerParams p;
  p.tau = 1e3;
  p.seed = 1;
  const OccupancyReport r = empirical_occupancy(scenarios::tiny2(), Algorithm::pblla, p, 1000, 200000);
  EXPECT_EQ(r.samples, 200000u);
  EXPECT_LE(r.top_mass, 2.0 / 16.0);
}

TEST(Occupancy, PbllaConcentratesOnMaximizer) {
  LearnerParams p;
  p.tau = 0.005;
  p.seed = 2;
  const OccupancyReport r = empirical_occupancy(scenarios::tiny2(), Algorithm::pblla, p, 100000, 1000000);
  EXPECT_EQ(r.maximizers.profiles, std::vector<ProfileId>{5});
  EXPECT_EQ(r.top_profile, 5u);
  EXPECT_GE(r.maximizer_mass, 0.9);
}

TEST(Occupancy, EmpiricalMatchesExactStationary) {
  const Fixture f(scenarios::tiny2());
  const ProfileSpace space = space_of(f);
  LearnerParams p;
  p.tau = 0.05;
  p.seed = 1;
  const StationaryReport exact = exact_stationary(space, Algorithm::pblla, p.tau);
  EXPECT_NEAR(exact.maximizer_mass, 0.7537, 5e-5);
  const OccupancyReport emp = empirical_occupancy(scenarios::tiny2(), Algorithm::pblla, p, 10000, 2000000);
  EXPECT_NEAR(emp.maximizer_mass, exact.maximizer_mass, 0.01);

  // The synchronous chain with a large altering probability exercises
  // concurrent exploration.
  p.m = 0.05;
  p.allow_m_below_bound = true;
  const StationaryReport exact_s = exact_stationary(space, Algorithm::spblla, p.tau, p.m);
  const OccupancyReport emp_s = empirical_occupancy(scenarios::tiny2(), Algorithm::spblla, p, 10000, 2000000);
  for (ProfileId id = 0; id < space.size(); ++id)
    EXPECT_NEAR(emp_s.mass(id), exact_s.committed_mass[id], 0.01) << "profile " << id;
}

TEST(Stationary, ProbabilitiesFormADistribution) {
  const Fixture f(scenarios::tiny2());
  const StationaryReport r = exact_stationary(space_of(f), Algorithm::spblla, 0.05, 0.1);
  double total = 0.0, committed = 0.0;
  for (double v : r.probability) total += v;
  for (double v : r.committed_mass) committed += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(committed, 1.0, 1e-12);
  EXPECT_EQ(r.states.size(), r.probability.size());
}

TEST(Stationary, ConcentrationGrowsAsTemperatureFalls) {
  const Fixture f(scenarios::tiny2());
  const ProfileSpace space = space_of(f);
  double last = 0.0;
  for (double tau : {0.05, 0.02, 0.005}) {
    const double mass = exact_stationary(space, Algorithm::pblla, tau).maximizer_mass;
    EXPECT_GT(mass, last) << "tau " << tau;
    last = mass;
  }
  EXPECT_GE(last, 0.9);
}

TEST(Stationary, SynchronousChainAtBoundConcentrates) {
  const Fixture f(scenarios::tiny2());
  const StationaryReport r = exact_stationary(space_of(f), Algorithm::spblla, 0.005, 3.2);
  EXPECT_GE(r.maximizer_mass, 0.9);
  const auto top = std::max_element(r.committed_mass.begin(), r.committed_mass.end());
  EXPECT_EQ(top - r.committed_mass.begin(), 5);
}

TEST(Stationary, RefusesLargeChains) {
  const Fixture f(scenarios::coupled_three(), 1);
  EXPECT_THROW(exact_stationary(space_of(f), Algorithm::spblla, 0.05, 1.0), BudgetExceeded);
}

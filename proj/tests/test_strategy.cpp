#include <gtest/gtest.h>

#include <algorithm>
#include <queue>
#include <set>

#include "uavgame/rng.hpp"
#include "uavgame/scenarios.hpp"
#include "uavgame/strategy.hpp"

using namespace uavgame;

TEST(Deployment, Tiny2PlacesBothUavsOnTheOnlyChannel) {
  for (std::uint64_t seed : {0u, 1u, 7u, 12345u}) {
    const auto [profile, channels] = init_deployment(scenarios::tiny2(), seed);
    ASSERT_EQ(profile.size(), 2u);
    for (const auto& s : profile) {
      EXPECT_TRUE(s.channels.test(0));
      EXPECT_EQ(s.channels.count(), 1u);
    }
    EXPECT_EQ(channels.noise, std::vector<double>{0.5});
  }
}

TEST(Deployment, SameSeedIsDeterministic) {
  const auto a = init_deployment(scenarios::field(), 42);
  const auto b = init_deployment(scenarios::field(), 42);
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
  const auto c = init_deployment(scenarios::field(), 43);
  EXPECT_NE(a.first, c.first);
}

TEST(Deployment, FieldScenarioRespectsCapacityAndNoiseRange) {
  const GameConfig c = scenarios::field();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto [profile, channels] = init_deployment(c, seed);
    EXPECT_EQ(profile_violation(c, profile), "");
    std::vector<std::size_t> load(c.channel_count, 0);
    for (const auto& s : profile) {
      EXPECT_EQ(s.channels.count(), c.channels_per_uav);
      for (std::size_t n = 0; n < c.channel_count; ++n) load[n] += s.channels.test(n);
    }
    EXPECT_LE(*std::max_element(load.begin(), load.end()), 25u);
    for (double ns : channels.noise) {
      EXPECT_GE(ns, 0.025);
      EXPECT_LE(ns, 1.0);
    }
  }
}

TEST(Deployment, TightCapacityIsSeated) {
  // desk(20) uses every one of its 40 channel seats.
  const GameConfig c = scenarios::desk(20);
  const auto [profile, channels] = init_deployment(c, 3);
  EXPECT_EQ(profile_violation(c, profile), "");
}

TEST(Deployment, RestartsUntilEveryUavIsSeated) {
  // Three channels of capacity 2, three UAVs needing two distinct channels:
  // a first draw of {a, b}, {a, b} strands the third UAV and forces a restart.
  GameConfig c = scenarios::tiny2();
  c.uav_count = 3;
  c.channel_count = 3;
  c.channel_capacity = 2;
  c.channels_per_uav = 2;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto [profile, channels] = init_deployment(c, seed);
    EXPECT_EQ(profile_violation(c, profile), "");
  }
}

TEST(NeighborSet, InteriorPointHasEightNeighbours) {
  const GameConfig c = scenarios::coupled_three();
  const Strategy s{ChannelMask{1}, 1, 1};
  const auto nb = neighbor_set(c, s);
  EXPECT_EQ(nb.size(), 8u);
  EXPECT_EQ(neighbor_count(c, s), 8u);
  for (const auto& t : nb) EXPECT_EQ(t.channels, s.channels);
}

TEST(NeighborSet, CornerHasThreeNeighboursInOrder) {
  const GameConfig c = scenarios::coupled_three();
  const Strategy s{ChannelMask{1}, 0, 0};
  const auto nb = neighbor_set(c, s);
  ASSERT_EQ(nb.size(), 3u);
  EXPECT_EQ(nb[0], (Strategy{s.channels, 0, 1}));
  EXPECT_EQ(nb[1], (Strategy{s.channels, 1, 0}));
  EXPECT_EQ(nb[2], (Strategy{s.channels, 1, 1}));
}

TEST(NeighborSet, NeighborAtMatchesMaterialisedSet) {
  for (const auto& c : {scenarios::tiny2(), scenarios::single_uav(), scenarios::desk(10)}) {
    for (std::uint32_t p = 0; p < c.power_count(); ++p) {
      for (std::uint32_t h = 0; h < c.altitude_count(); ++h) {
        const Strategy s{ChannelMask{1}, p, h};
        const auto nb = neighbor_set(c, s);
        ASSERT_EQ(nb.size(), neighbor_count(c, s));
        for (std::size_t k = 0; k < nb.size(); ++k) EXPECT_EQ(neighbor_at(c, s, k), nb[k]);
      }
    }
  }
}

TEST(NeighborSet, ReversibleAndConnected) {
  for (const auto& c : {scenarios::tiny2(), scenarios::single_uav(), scenarios::desk(10)}) {
    const std::size_t np = c.power_count();
    const std::size_t nh = c.altitude_count();
    const auto key = [&](const Strategy& s) { return s.power * nh + s.altitude; };
    for (std::uint32_t p = 0; p < np; ++p) {
      for (std::uint32_t h = 0; h < nh; ++h) {
        const Strategy s{ChannelMask{1}, p, h};
        for (const auto& t : neighbor_set(c, s)) {
          const auto back = neighbor_set(c, t);
          EXPECT_NE(std::find(back.begin(), back.end(), s), back.end());
        }
      }
    }
    std::set<std::size_t> seen{0};
    std::queue<Strategy> frontier;
    frontier.push(Strategy{ChannelMask{1}, 0, 0});
    while (!frontier.empty()) {
      const Strategy s = frontier.front();
      frontier.pop();
      for (const auto& t : neighbor_set(c, s))
        if (seen.insert(key(t)).second) frontier.push(t);
    }
    EXPECT_EQ(seen.size(), np * nh);
  }
}

TEST(NeighborSet, SingleLevelGridHasNoMoves) {
  GameConfig c = scenarios::tiny2();
  c.power_levels = {1.0};
  c.altitude_levels = {1.0};
  c.turbulence = {1.0};
  EXPECT_TRUE(neighbor_set(c, Strategy{ChannelMask{1}, 0, 0}).empty());
  EXPECT_EQ(neighbor_count(c, Strategy{ChannelMask{1}, 0, 0}), 0u);
}

TEST(ProfileViolation, ReportsBadProfiles) {
  const GameConfig c = scenarios::tiny2();
  auto [profile, channels] = init_deployment(c, 1);
  EXPECT_EQ(profile_violation(c, profile), "");
  auto bad = profile;
  bad[0].power = 5;
  EXPECT_NE(profile_violation(c, bad), "");
  bad = profile;
  bad[1].channels.set(3);
  EXPECT_NE(profile_violation(c, bad), "");
  bad = profile;
  bad.pop_back();
  EXPECT_NE(profile_violation(c, bad), "");
}

TEST(Rng, StreamsAreIndependentAndReproducible) {
  Rng a(7, Stream::learning), b(7, Stream::learning), d(7, Stream::deployment);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(Rng(7, Stream::learning).next(), d.next());
  EXPECT_EQ(a.draws(), 100u);
}

TEST(Rng, UniformIndexCoversRangeWithoutBias) {
  Rng r(3);
  std::vector<int> counts(3, 0);
  const int n = 300000;
  for (int k = 0; k < n; ++k) ++counts[r.index(3)];
  for (int c : counts) EXPECT_NEAR(c, n / 3.0, 5.0 * std::sqrt(n * (1.0 / 3) * (2.0 / 3)));
  for (int k = 0; k < 1000; ++k) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, DegenerateRangeStillConsumesOneDraw) {
  Rng r(1);
  EXPECT_EQ(r.uniform(0.5, 0.5), 0.5);
  EXPECT_EQ(r.draws(), 1u);
}

#pragma once

#include <initializer_list>
#include <utility>

#include "uavgame/game.hpp"
#include "uavgame/strategy.hpp"

namespace uavgame::test {

/// Game deployed with `seed` plus a profile on the deployed channels with the
/// given (power index, altitude index) per UAV.
struct Fixture {
  Game game;
  StrategyProfile deployed;

  Fixture(const GameConfig& config, std::uint64_t seed = 1)
      : Fixture(config, init_deployment(config, seed)) {}

  [[nodiscard]] StrategyProfile at(std::initializer_list<std::pair<std::uint32_t, std::uint32_t>> levels) const {
    StrategyProfile p = deployed;
    std::size_t i = 0;
    for (const auto& [power, altitude] : levels) {
      p[i].power = power;
      p[i].altitude = altitude;
      ++i;
    }
    return p;
  }

 private:
  Fixture(const GameConfig& config, std::pair<StrategyProfile, ChannelState> d)
      : game(config, std::move(d.second)), deployed(std::move(d.first)) {}
};

}  // namespace uavgame::test

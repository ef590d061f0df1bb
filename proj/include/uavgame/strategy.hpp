#pragma once

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uavgame/config.hpp"
#include "uavgame/rng.hpp"

namespace uavgame {

using ChannelMask = std::bitset<kMaxChannels>;

/// One UAV's decision: the channels it occupies (fixed after deployment) and
/// its power and altitude level indices. The power level applies to every
/// selected channel.
struct Strategy {
  ChannelMask channels;
  std::uint32_t power = 0;
  std::uint32_t altitude = 0;

  bool operator==(const Strategy&) const = default;
};

/// Indexed by UAV id.
using StrategyProfile = std::vector<Strategy>;

/// Per-channel intrinsic noise in watts, drawn once per run.
struct ChannelState {
  std::vector<double> noise;

  bool operator==(const ChannelState&) const = default;
};

class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks the per-strategy and per-channel invariants; returns an empty string when valid.
inline std::string profile_violation(const GameConfig& config, const StrategyProfile& profile) {
  if (profile.size() != config.uav_count)
    return "profile holds " + std::to_string(profile.size()) + " strategies, expected " +
           std::to_string(config.uav_count);
  std::vector<std::size_t> load(config.channel_count, 0);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const Strategy& s = profile[i];
    if (s.channels.count() != config.channels_per_uav)
      return "uav " + std::to_string(i) + " occupies " + std::to_string(s.channels.count()) +
             " channels, expected " + std::to_string(config.channels_per_uav);
    for (std::size_t n = config.channel_count; n < kMaxChannels; ++n)
      if (s.channels.test(n)) return "uav " + std::to_string(i) + " selects a channel out of range";
    if (s.power >= config.power_count() || s.altitude >= config.altitude_count())
      return "uav " + std::to_string(i) + " has a level index out of range";
    for (std::size_t n = 0; n < config.channel_count; ++n)
      if (s.channels.test(n) && ++load[n] > config.channel_capacity)
        return "channel " + std::to_string(n) + " exceeds its capacity";
  }
  return {};
}

/// C_i(s): same channels, power and altitude indices within +-1 (diagonals
/// included), clipped to the grid, excluding s. Ordered by (power, altitude).
inline std::vector<Strategy> neighbor_set(const GameConfig& config, const Strategy& s) {
  std::vector<Strategy> out;
  out.reserve(8);
  const auto np = static_cast<std::int64_t>(config.power_count());
  const auto nh = static_cast<std::int64_t>(config.altitude_count());
  for (std::int64_t dp = -1; dp <= 1; ++dp) {
    const std::int64_t p = static_cast<std::int64_t>(s.power) + dp;
    if (p < 0 || p >= np) continue;
    for (std::int64_t dh = -1; dh <= 1; ++dh) {
      const std::int64_t h = static_cast<std::int64_t>(s.altitude) + dh;
      if (h < 0 || h >= nh || (dp == 0 && dh == 0)) continue;
      out.push_back(Strategy{s.channels, static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(h)});
    }
  }
  return out;
}

/// Size of neighbor_set without materialising it.
inline std::size_t neighbor_count(const GameConfig& config, const Strategy& s) {
  const auto span = [](std::uint32_t k, std::size_t n) -> std::size_t {
    return 1 + (k > 0 ? 1 : 0) + (k + 1 < n ? 1 : 0);
  };
  return span(s.power, config.power_count()) * span(s.altitude, config.altitude_count()) - 1;
}

/// The `k`-th entry of neighbor_set(config, s).
inline Strategy neighbor_at(const GameConfig& config, const Strategy& s, std::size_t k) {
  const std::uint32_t p_lo = s.power > 0 ? s.power - 1 : 0;
  const std::uint32_t h_lo = s.altitude > 0 ? s.altitude - 1 : 0;
  const std::uint32_t h_hi =
      s.altitude + 1 < config.altitude_count() ? s.altitude + 1 : s.altitude;
  const std::size_t width = h_hi - h_lo + 1;
  const std::size_t centre = (s.power - p_lo) * width + (s.altitude - h_lo);
  const std::size_t slot = k >= centre ? k + 1 : k;
  return Strategy{s.channels, static_cast<std::uint32_t>(p_lo + slot / width),
                  static_cast<std::uint32_t>(h_lo + slot % width)};
}

inline constexpr int kPlacementRetries = 64;

/// Seeded deployment: sequential greedy channel placement in UAV-id order
/// (each UAV draws N_C distinct channels uniformly among those with spare
/// capacity, restarting the whole placement when a UAV cannot be seated),
/// uniform power and altitude indices, and uniform per-channel noise.
inline std::pair<StrategyProfile, ChannelState> init_deployment(const GameConfig& config,
                                                                std::uint64_t seed) {
  validate_config(config).throw_if_failed();
  Rng rng(seed, Stream::deployment);

  StrategyProfile profile(config.uav_count);
  bool placed = false;
  for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
    std::vector<std::size_t> load(config.channel_count, 0);
    placed = true;
    for (auto& s : profile) {
      s.channels.reset();
      for (std::size_t pick = 0; pick < config.channels_per_uav; ++pick) {
        std::vector<std::size_t> open;
        for (std::size_t n = 0; n < config.channel_count; ++n)
          if (load[n] < config.channel_capacity && !s.channels.test(n)) open.push_back(n);
        if (open.empty()) {
          placed = false;
          break;
        }
        const std::size_t n = open[rng.index(open.size())];
        s.channels.set(n);
        ++load[n];
      }
      if (!placed) break;
    }
  }
  if (!placed)
    throw PlacementError("could not place " + std::to_string(config.uav_count) + " UAVs on " +
                         std::to_string(config.channel_count) + " channels after " +
                         std::to_string(kPlacementRetries) + " attempts");

  for (auto& s : profile) {
    s.power = static_cast<std::uint32_t>(rng.index(config.power_count()));
    s.altitude = static_cast<std::uint32_t>(rng.index(config.altitude_count()));
  }

  ChannelState channels;
  channels.noise.resize(config.channel_count);
  for (auto& ns : channels.noise) ns = rng.uniform(config.noise_range.first, config.noise_range.second);
  return {std::move(profile), std::move(channels)};
}

/// Channel masks of a profile, in UAV-id order.
inline std::vector<ChannelMask> channel_assignment(const StrategyProfile& profile) {
  std::vector<ChannelMask> out;
  out.reserve(profile.size());
  for (const auto& s : profile) out.push_back(s.channels);
  return out;
}

}  // namespace uavgame

#pragma once

#include <cstddef>
#include <numbers>

#include "uavgame/config.hpp"

// Named scenario constants shared by the tests, the verification suite and
// the bundled presets.
namespace uavgame::scenarios {

/// Two UAVs on one channel, 2x2 level grid, unit balance indices and no
/// coupling: each utility reduces to E/p + p + pi h^2 / D.
inline GameConfig tiny2() {
  GameConfig c;
  c.uav_count = 2;
  c.channel_count = 1;
  c.channel_capacity = 2;
  c.channels_per_uav = 1;
  c.power_levels = {0.5, 1.0};
  c.altitude_levels = {1.0, 2.0};
  c.field_angle = std::numbers::pi / 4.0;
  c.battery = 1.0;
  c.area = 100.0;
  c.balance_a = c.balance_b = c.balance_c = 1.0;
  c.snr_index = 1.0;
  c.snr_balance = c.coverage_tradeoff = c.overlap_index = 0.0;
  c.turbulence = {1.0, 1.0};
  c.noise_range = {0.5, 0.5};
  return c;
}

/// tiny2 with interference, coverage trade-off and overlap switched on.
inline GameConfig coupled_tiny() {
  GameConfig c = tiny2();
  c.snr_balance = 0.1;
  c.coverage_tradeoff = 0.05;
  c.overlap_index = 1e-3;
  return c;
}

/// Three UAVs on two channels with 3x3 grids, a turbulence ramp, mu != 1 and
/// random noise: 729 profiles.
inline GameConfig coupled_three() {
  GameConfig c;
  c.uav_count = 3;
  c.channel_count = 2;
  c.channel_capacity = 2;
  c.channels_per_uav = 1;
  c.power_levels = {0.4, 0.7, 1.0};
  c.altitude_levels = {1.0, 1.5, 2.0};
  c.field_angle = std::numbers::pi / 6.0;
  c.battery = 0.6;
  c.area = 50.0;
  c.balance_a = 1.0;
  c.balance_b = 0.8;
  c.balance_c = 2.0;
  c.snr_balance = 0.2;
  c.snr_index = 2.0;
  c.coverage_tradeoff = 0.1;
  c.overlap_index = 0.01;
  c.turbulence = {1.0, 0.95, 0.9};
  c.noise_range = {0.1, 0.6};
  return c;
}

/// One UAV on one of two channels; the game is a single-player maximisation.
inline GameConfig single_uav() {
  GameConfig c;
  c.uav_count = 1;
  c.channel_count = 2;
  c.channel_capacity = 1;
  c.channels_per_uav = 1;
  c.power_levels = {0.25, 0.5, 0.75, 1.0};
  c.altitude_levels = {1.0, 2.0, 3.0};
  c.field_angle = std::numbers::pi / 6.0;
  c.battery = 0.3;
  c.area = 20.0;
  c.balance_a = c.balance_b = c.balance_c = 1.0;
  c.snr_index = 1.0;
  c.snr_balance = 0.0;
  c.coverage_tradeoff = 0.2;
  c.overlap_index = 0.0;
  c.turbulence = {1.0, 0.9, 0.8};
  c.noise_range = {0.2, 0.8};
  return c;
}

/// The field constants at desk size (three UAVs, two channels, 3x3 grids),
/// where the printed closed-form potential is not exact.
inline GameConfig errata() {
  GameConfig c;
  c.uav_count = 3;
  c.channel_count = 2;
  c.channel_capacity = 3;
  c.channels_per_uav = 1;
  c.power_levels = {0.025, 0.05, 0.075};
  c.altitude_levels = {1.0, 1.2, 1.4};
  c.field_angle = std::numbers::pi / 6.0;
  c.battery = 5.0;
  c.area = 4000.0;
  c.balance_a = 0.002;
  c.balance_b = 0.005;
  c.balance_c = 0.03;
  c.snr_balance = 0.002;
  c.snr_index = 10.0;
  c.coverage_tradeoff = 0.002;
  c.overlap_index = 1e-4;
  c.turbulence = {1.0, 0.9, 0.8};
  c.noise_range = {0.025, 1.0};
  return c;
}

/// Full-size field scenario: 100 UAVs, 30 channels of capacity 25, five
/// channels per UAV, 40 power levels 0.025..1 W, 46 altitude levels 1..10 km.
inline GameConfig field() {
  GameConfig c;
  c.uav_count = 100;
  c.channel_count = 30;
  c.channel_capacity = 25;
  c.channels_per_uav = 5;
  c.power_levels = uniform_grid(0.025, 0.025, 40);
  c.altitude_levels = uniform_grid(1.0, 0.2, 46);
  c.field_angle = std::numbers::pi / 6.0;
  c.battery = 5.0;
  c.area = 4000.0;
  c.balance_a = 0.002;
  c.balance_b = 0.005;
  c.balance_c = 0.03;
  c.snr_balance = 0.002;
  c.snr_index = 10.0;
  c.coverage_tradeoff = 0.002;
  c.overlap_index = 1e-4;
  c.turbulence = turbulence_ramp(46, 1.0, 0.8);
  c.noise_range = {0.025, 1.0};
  return c;
}

/// Desk-scale trend scenario: field balance indices on a 21-level 0.5..1.5 W
/// power grid and a 5-level 1..3 km altitude grid. The single-move bound stays
/// below the temperatures studied while the climb from a random start is
/// several times the standing fluctuation. Four channels of capacity 10 seat
/// up to 20 UAVs at two channels each.
inline GameConfig desk(std::size_t uav_count = 10) {
  GameConfig c = field();
  c.uav_count = uav_count;
  c.channel_count = 4;
  c.channel_capacity = 10;
  c.channels_per_uav = 2;
  c.power_levels = uniform_grid(0.5, 0.05, 21);
  c.altitude_levels = uniform_grid(1.0, 0.5, 5);
  c.area = 400.0;
  c.turbulence = turbulence_ramp(5, 1.0, 0.8);
  return c;
}

}  // namespace uavgame::scenarios

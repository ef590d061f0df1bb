#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uavgame/config.hpp"
#include "uavgame/strategy.hpp"

namespace uavgame {

/// A validated configuration together with the run's channel noise and the
/// per-level lookup tables every utility evaluation needs.
class Game {
 public:
  Game(GameConfig config, ChannelState channels)
      : config_(std::move(config)), channels_(std::move(channels)) {
    validate_config(config_).throw_if_failed();
    if (channels_.noise.size() != config_.channel_count)
      throw std::invalid_argument("channel state holds " + std::to_string(channels_.noise.size()) +
                                  " noise values for " + std::to_string(config_.channel_count) +
                                  " channels");
    const double t = std::tan(config_.field_angle);
    coverage_.reserve(config_.altitude_count());
    turbulent_coverage_.reserve(config_.altitude_count());
    for (std::size_t k = 0; k < config_.altitude_count(); ++k) {
      const double radius = config_.altitude_levels[k] * t;
      coverage_.push_back(std::numbers::pi * radius * radius);
      turbulent_coverage_.push_back(std::numbers::pi * std::pow(radius, 2.0 * config_.turbulence[k]));
    }
  }

  [[nodiscard]] const GameConfig& config() const noexcept { return config_; }
  [[nodiscard]] const ChannelState& channels() const noexcept { return channels_; }
  [[nodiscard]] std::size_t uav_count() const noexcept { return config_.uav_count; }
  [[nodiscard]] std::size_t channel_count() const noexcept { return config_.channel_count; }

  /// Transmit power on each selected channel.
  [[nodiscard]] double power(const Strategy& s) const { return config_.power_levels[s.power]; }
  /// Sum over channels of P_in.
  [[nodiscard]] double total_power(const Strategy& s) const {
    return power(s) * static_cast<double>(config_.channels_per_uav);
  }
  /// D = pi (h tan(theta))^2.
  [[nodiscard]] double coverage(const Strategy& s) const { return coverage_[s.altitude]; }
  /// pi (h tan(theta))^(2 beta(h)).
  [[nodiscard]] double turbulent_coverage(const Strategy& s) const {
    return turbulent_coverage_[s.altitude];
  }

 private:
  GameConfig config_;
  ChannelState channels_;
  std::vector<double> coverage_;
  std::vector<double> turbulent_coverage_;
};

/// Sums that every UAV's aggregates are derived from: per-channel load
/// (all transmit power plus intrinsic noise) and total raw coverage.
struct ProfileTotals {
  std::vector<double> channel_load;
  double coverage_sum = 0.0;
};

inline ProfileTotals profile_totals(const Game& game, const StrategyProfile& profile) {
  ProfileTotals t{game.channels().noise, 0.0};
  for (const auto& s : profile) {
    const double p = game.power(s);
    for (std::size_t n = 0; n < game.channel_count(); ++n)
      if (s.channels.test(n)) t.channel_load[n] += p;
    t.coverage_sum += game.coverage(s);
  }
  return t;
}

/// Interaction terms and aggregators seen by one UAV.
struct Aggregates {
  std::vector<double> power_interaction;  // sigma_ip, zero off the UAV's channels
  double area_interaction = 0.0;          // sigma_ia
  std::vector<double> aggregator_power;   // g1, defined on the UAV's channels
  double aggregator_area = 0.0;           // g2
};

inline Aggregates aggregates(const Game& game, const StrategyProfile& profile, std::size_t i) {
  const std::size_t n_ch = game.channel_count();
  Aggregates a;
  a.power_interaction.assign(n_ch, 0.0);
  a.aggregator_power.assign(n_ch, 0.0);
  const Strategy& own = profile.at(i);
  for (std::size_t n = 0; n < n_ch; ++n) {
    if (!own.channels.test(n)) continue;
    double others = game.channels().noise[n];
    for (std::size_t j = 0; j < profile.size(); ++j)
      if (j != i && profile[j].channels.test(n)) others += game.power(profile[j]);
    a.power_interaction[n] = others;
    a.aggregator_power[n] = others + game.power(own);
  }
  for (std::size_t j = 0; j < profile.size(); ++j)
    if (j != i) a.area_interaction += game.coverage(profile[j]);
  a.aggregator_area = a.area_interaction + game.coverage(own);
  return a;
}

struct CoverageTerms {
  double raw = 0.0;         // D_i
  double turbulent = 0.0;   // D~_i
  double effective = 0.0;   // D-_i = D_i - kappa * sum_{j != i} D_j
  bool positive = true;     // false when D-_i <= 0
};

inline CoverageTerms coverage_terms(const Game& game, const StrategyProfile& profile, std::size_t i) {
  const Strategy& own = profile.at(i);
  double others = 0.0;
  for (std::size_t j = 0; j < profile.size(); ++j)
    if (j != i) others += game.coverage(profile[j]);
  CoverageTerms c;
  c.raw = game.coverage(own);
  c.turbulent = game.turbulent_coverage(own);
  c.effective = c.raw - game.config().overlap_index * others;
  c.positive = c.effective > 0.0;
  return c;
}

/// Signal-to-noise ratio of UAV i on channel n: P_in / (sum_{j != i} P_jn + Ns_n).
inline double snr(const Game& game, const StrategyProfile& profile, std::size_t i, std::size_t n) {
  const Strategy& own = profile.at(i);
  if (n >= game.channel_count() || !own.channels.test(n))
    throw std::invalid_argument("uav " + std::to_string(i) + " does not occupy channel " +
                                std::to_string(n));
  double interference = game.channels().noise[n];
  for (std::size_t j = 0; j < profile.size(); ++j)
    if (j != i && profile[j].channels.test(n)) interference += game.power(profile[j]);
  return game.power(own) / interference;
}

/// mu * (P_in - gamma * sigma_ip(n)): the linear SNR surrogate used inside the SNR utility.
inline double linearized_snr(const Game& game, const StrategyProfile& profile, std::size_t i,
                             std::size_t n) {
  const Strategy& own = profile.at(i);
  if (n >= game.channel_count() || !own.channels.test(n))
    throw std::invalid_argument("uav " + std::to_string(i) + " does not occupy channel " +
                                std::to_string(n));
  const Aggregates a = aggregates(game, profile, i);
  const GameConfig& c = game.config();
  return c.snr_index * (game.power(own) - c.snr_balance * a.power_interaction[n]);
}

struct UtilityBreakdown {
  double energy = 0.0;            // U_E
  double snr_utility = 0.0;       // U_SNR
  double coverage_utility = 0.0;  // U_D
  double total = 0.0;             // A U_E + B U_SNR + C U_D
  double raw_coverage = 0.0;
  double turbulence_coverage = 0.0;
  double true_coverage = 0.0;
};

class ZeroPowerError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Utility of UAV i given precomputed totals for the same profile.
inline UtilityBreakdown utility(const Game& game, const StrategyProfile& profile,
                                const ProfileTotals& totals, std::size_t i) {
  const GameConfig& c = game.config();
  const Strategy& own = profile[i];
  const double p = game.power(own);
  const double p_sum = game.total_power(own);
  if (!(p_sum > 0.0)) throw ZeroPowerError("uav " + std::to_string(i) + " transmits no power");

  double linear_snr = 0.0;
  for (std::size_t n = 0; n < game.channel_count(); ++n)
    if (own.channels.test(n)) linear_snr += p - c.snr_balance * (totals.channel_load[n] - p);
  linear_snr *= c.snr_index;

  UtilityBreakdown u;
  u.raw_coverage = game.coverage(own);
  u.turbulence_coverage = game.turbulent_coverage(own);
  u.true_coverage = u.raw_coverage - c.overlap_index * (totals.coverage_sum - u.raw_coverage);
  u.energy = c.battery / p_sum;
  u.snr_utility = linear_snr - c.coverage_tradeoff * u.true_coverage;
  u.coverage_utility = u.turbulence_coverage / c.area;
  u.total = c.balance_a * u.energy + c.balance_b * u.snr_utility + c.balance_c * u.coverage_utility;
  return u;
}

inline UtilityBreakdown utility(const Game& game, const StrategyProfile& profile, std::size_t i) {
  if (i >= profile.size()) throw std::out_of_range("uav id " + std::to_string(i) + " out of range");
  return utility(game, profile, profile_totals(game, profile), i);
}

/// U = sum_i U_i.
inline double global_utility(const Game& game, const StrategyProfile& profile,
                             const ProfileTotals& totals) {
  double sum = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) sum += utility(game, profile, totals, i).total;
  return sum;
}

inline double global_utility(const Game& game, const StrategyProfile& profile) {
  return global_utility(game, profile, profile_totals(game, profile));
}

enum class PotentialVariant {
  exact,  // sum of each utility's own-strategy part
  printed,  // the closed form with unit SNR index and overlap-corrected coverage
};

/// Own-strategy part f_i of U_i = f_i(s_i) + h_i(s_-i).
inline double own_strategy_term(const Game& game, const Strategy& s) {
  const GameConfig& c = game.config();
  const double p_sum = game.total_power(s);
  if (!(p_sum > 0.0)) throw ZeroPowerError("strategy transmits no power");
  return c.balance_a * c.battery / p_sum + c.balance_b * c.snr_index * p_sum -
         c.balance_b * c.coverage_tradeoff * game.coverage(s) +
         c.balance_c * game.turbulent_coverage(s) / c.area;
}

inline double potential(const Game& game, const StrategyProfile& profile,
                        PotentialVariant variant = PotentialVariant::exact) {
  double phi = 0.0;
  if (variant == PotentialVariant::exact) {
    for (const auto& s : profile) phi += own_strategy_term(game, s);
    return phi;
  }
  const GameConfig& c = game.config();
  double coverage_sum = 0.0;
  for (const auto& s : profile) coverage_sum += game.coverage(s);
  for (const auto& s : profile) {
    const double p_sum = game.total_power(s);
    if (!(p_sum > 0.0)) throw ZeroPowerError("strategy transmits no power");
    const double effective = game.coverage(s) - c.overlap_index * (coverage_sum - game.coverage(s));
    phi += c.balance_a * c.battery / p_sum +
           c.balance_b * (p_sum - c.coverage_tradeoff * effective) +
           c.balance_c * game.turbulent_coverage(s) / c.area;
  }
  return phi;
}

}  // namespace uavgame

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "uavgame/config.hpp"
#include "uavgame/game.hpp"
#include "uavgame/metrics.hpp"
#include "uavgame/rng.hpp"
#include "uavgame/strategy.hpp"

namespace uavgame {

enum class Algorithm {
  pblla,   // asynchronous: one UAV explores at a time
  spblla,  // synchronous: every idle UAV explores with probability omega
};

inline std::string_view to_string(Algorithm a) {
  return a == Algorithm::pblla ? "pblla" : "spblla";
}

inline Algorithm parse_algorithm(std::string_view text) {
  if (text == "pblla") return Algorithm::pblla;
  if (text == "spblla") return Algorithm::spblla;
  throw std::invalid_argument("unknown algorithm '" + std::string(text) + "'");
}

struct LearnerParams {
  double tau = 0.01;  // dynamic degree (temperature)
  double m = 0.0;     // probability index, synchronous learner only
  std::uint64_t max_iterations = 0;
  std::uint64_t seed = 0;
  bool allow_m_below_bound = false;

  bool operator==(const LearnerParams&) const = default;
};

/// Piecewise-constant temperature: entry (t_k, tau_k) applies from iteration
/// t_k until the next entry. Before the first entry, and when empty, the
/// learner's base tau applies.
struct TauSchedule {
  std::vector<std::pair<std::uint64_t, double>> steps;

  [[nodiscard]] double at(std::uint64_t iteration, double base) const {
    double tau = base;
    for (const auto& [from, value] : steps) {
      if (from > iteration) break;
      tau = value;
    }
    return tau;
  }

  bool operator==(const TauSchedule&) const = default;
};

class BoundViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// exp(u_curr/tau) / (exp(u_prev/tau) + exp(u_curr/tau)), evaluated without overflow.
inline double boltzmann_keep_probability(double u_prev, double u_curr, double tau) {
  if (!std::isfinite(u_prev) || !std::isfinite(u_curr))
    throw std::domain_error("payoffs must be finite");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::domain_error("tau must be finite and positive");
  const double d = (u_curr - u_prev) / tau;
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

/// omega = (e^{-1/tau})^m = e^{-m/tau}.
inline double altering_probability(double tau, double m) {
  if (!(tau > 0.0)) throw std::domain_error("tau must be positive");
  if (!(m >= 0.0)) throw std::domain_error("m must be non-negative");
  return std::exp(-m / tau);
}

/// Worst-case change of one UAV's utility under a single constrained move.
struct DeltaBound {
  /// energy, own power in the SNR term, shared-channel interference,
  /// coverage trade-off, overlap, turbulent coverage.
  std::array<double, 6> terms{};
  double total = 0.0;
  double minimum_m = 0.0;  // 2 * total
};

inline DeltaBound delta_bound(const GameConfig& c) {
  validate_config(c).throw_if_failed();
  const double dp = c.power_step();
  const double dh = c.altitude_step();
  const double p1 = c.power_levels.front();
  const double h_top = c.altitude_levels.back();
  const double beta_top = c.turbulence.back();
  const double tan2 = std::pow(std::tan(c.field_angle), 2);
  const auto nc = static_cast<double>(c.channels_per_uav);
  const auto m_uav = static_cast<double>(c.uav_count);
  const double shared = nc * (static_cast<double>(std::min(c.channel_capacity, c.uav_count)) - 1.0);
  const double top_band = 2.0 * h_top * dh - dh * dh;

  DeltaBound b;
  b.terms[0] = c.balance_a * c.battery * dp / (nc * p1 * (p1 + dp));
  b.terms[1] = c.balance_b * c.snr_index * nc * dp;
  b.terms[2] = c.balance_b * c.snr_index * c.snr_balance * dp * shared;
  b.terms[3] = c.balance_b * c.coverage_tradeoff * std::numbers::pi * tan2 * top_band;
  b.terms[4] = c.balance_b * c.coverage_tradeoff * c.overlap_index * (m_uav - 1.0) *
               std::numbers::pi * tan2 * top_band;
  b.terms[5] = c.balance_c / c.area * std::numbers::pi * tan2 *
               (std::pow(h_top, 2.0 * beta_top) - std::pow(h_top - dh, 2.0 * beta_top));
  for (double t : b.terms) b.total += t;
  b.minimum_m = 2.0 * b.total;
  return b;
}

/// Throws BoundViolation when the synchronous learner's m does not exceed 2 * Delta.
inline void check_m_bound(const GameConfig& config, const LearnerParams& params) {
  if (params.allow_m_below_bound) return;
  const DeltaBound b = delta_bound(config);
  if (!(params.m > b.minimum_m))
    throw BoundViolation("m = " + detail::str(params.m) + " must exceed 2*Delta = " +
                         detail::str(b.minimum_m) +
                         " for the synchronous learner to converge (set allow_m_below_bound to override)");
}

/// Augmented learner state: the last two profiles, the exploration flags and
/// the payoffs each exploring UAV observed under those two profiles.
struct LearnerState {
  std::uint64_t iteration = 0;
  StrategyProfile current;
  StrategyProfile previous;
  std::vector<std::uint8_t> exploring;
  std::vector<double> payoff_prev;  // U_i(s(t-1)), meaningful while exploring[i]
  std::vector<double> payoff_curr;  // U_i(s(t)),   meaningful while exploring[i]
  ProfileTotals totals;             // aggregates of `current`

  [[nodiscard]] std::uint64_t active_flags() const {
    return static_cast<std::uint64_t>(std::count(exploring.begin(), exploring.end(), 1));
  }

  /// The profile with every exploring UAV's trial replaced by the strategy it would revert to.
  [[nodiscard]] StrategyProfile committed_profile() const {
    StrategyProfile out = current;
    for (std::size_t i = 0; i < out.size(); ++i)
      if (exploring[i]) out[i] = previous[i];
    return out;
  }
};

inline LearnerState initial_state(const Game& game, StrategyProfile profile) {
  if (auto why = profile_violation(game.config(), profile); !why.empty())
    throw std::invalid_argument("invalid initial profile: " + why);
  LearnerState s;
  s.totals = profile_totals(game, profile);
  s.previous = profile;
  s.current = std::move(profile);
  s.exploring.assign(s.current.size(), 0);
  s.payoff_prev.assign(s.current.size(), 0.0);
  s.payoff_curr.assign(s.current.size(), 0.0);
  return s;
}

namespace detail {

inline void move_totals(const Game& game, ProfileTotals& t, const Strategy& from, const Strategy& to) {
  const double dp = game.power(to) - game.power(from);
  if (dp != 0.0)
    for (std::size_t n = 0; n < game.channel_count(); ++n)
      if (from.channels.test(n)) t.channel_load[n] += dp;
  t.coverage_sum += game.coverage(to) - game.coverage(from);
}

// Incremental totals are rebuilt from scratch on this period to bound drift.
inline constexpr std::uint64_t kTotalsResync = 1024;

inline void advance(const Game& game, LearnerState& state, StrategyProfile next) {
  for (std::size_t i = 0; i < next.size(); ++i)
    if (!(next[i] == state.current[i])) move_totals(game, state.totals, state.current[i], next[i]);
  state.previous = std::move(state.current);
  state.current = std::move(next);
  ++state.iteration;
  if (state.iteration % kTotalsResync == 0) state.totals = profile_totals(game, state.current);
}

}  // namespace detail

/// One asynchronous step. With no UAV exploring, a uniformly chosen UAV
/// installs a uniform trial from its constrained set; otherwise the exploring
/// UAV keeps its trial with the Boltzmann probability or reverts. Draws: UAV
/// index then neighbor index, or a single resolution draw.
inline void pblla_step(LearnerState& state, const Game& game, double tau, Rng& rng) {
  const std::size_t m_uav = state.current.size();
  StrategyProfile next = state.current;
  const auto flagged = std::find(state.exploring.begin(), state.exploring.end(), 1);

  if (flagged == state.exploring.end()) {
    const auto i = static_cast<std::size_t>(rng.index(m_uav));
    const std::size_t k = neighbor_count(game.config(), state.current[i]);
    if (k == 0) {
      detail::advance(game, state, std::move(next));
      return;
    }
    next[i] = neighbor_at(game.config(), state.current[i], rng.index(k));
    state.payoff_prev[i] = utility(game, state.current, state.totals, i).total;
    detail::advance(game, state, std::move(next));
    state.payoff_curr[i] = utility(game, state.current, state.totals, i).total;
    state.exploring[i] = 1;
    return;
  }

  const auto i = static_cast<std::size_t>(flagged - state.exploring.begin());
  const double keep = boltzmann_keep_probability(state.payoff_prev[i], state.payoff_curr[i], tau);
  if (!(rng.uniform() < keep)) next[i] = state.previous[i];
  state.exploring[i] = 0;
  detail::advance(game, state, std::move(next));
}

/// One synchronous step. Every UAV decides from the pre-step state, in
/// ascending id order of RNG use: an idle UAV explores with probability omega
/// (flag draw, then neighbor draw), an exploring UAV resolves (one draw).
inline void spblla_step(LearnerState& state, const Game& game, double tau, double omega, Rng& rng) {
  const std::size_t m_uav = state.current.size();
  StrategyProfile next = state.current;
  std::vector<std::size_t> started;

  for (std::size_t i = 0; i < m_uav; ++i) {
    if (!state.exploring[i]) {
      if (!(rng.uniform() < omega)) continue;
      const std::size_t k = neighbor_count(game.config(), state.current[i]);
      if (k == 0) continue;
      next[i] = neighbor_at(game.config(), state.current[i], rng.index(k));
      started.push_back(i);
    } else {
      const double keep =
          boltzmann_keep_probability(state.payoff_prev[i], state.payoff_curr[i], tau);
      if (!(rng.uniform() < keep)) next[i] = state.previous[i];
      state.exploring[i] = 0;
    }
  }

  for (std::size_t i : started) state.payoff_prev[i] = utility(game, state.current, state.totals, i).total;
  detail::advance(game, state, std::move(next));
  for (std::size_t i : started) {
    state.payoff_curr[i] = utility(game, state.current, state.totals, i).total;
    state.exploring[i] = 1;
  }
}

/// Stepwise driver for either learner over a fixed game.
class Learner {
 public:
  Learner(Algorithm algorithm, const Game& game, StrategyProfile initial, LearnerParams params,
          TauSchedule schedule = {})
      : algorithm_(algorithm),
        game_(&game),
        params_(params),
        schedule_(std::move(schedule)),
        rng_(params.seed, Stream::learning),
        state_(initial_state(game, std::move(initial))) {
    if (!(params_.tau > 0.0)) throw std::invalid_argument("tau must be positive");
    for (const auto& [from, tau] : schedule_.steps)
      if (!(tau > 0.0)) throw std::invalid_argument("scheduled tau must be positive");
    if (algorithm_ == Algorithm::spblla) {
      if (!(params_.m >= 0.0)) throw std::invalid_argument("m must be non-negative");
      check_m_bound(game.config(), params_);
    }
  }

  void step() {
    const double tau = schedule_.at(state_.iteration, params_.tau);
    if (algorithm_ == Algorithm::pblla) {
      pblla_step(state_, *game_, tau, rng_);
    } else {
      if (tau != omega_tau_) {
        omega_tau_ = tau;
        omega_ = altering_probability(tau, params_.m);
      }
      spblla_step(state_, *game_, tau, omega_, rng_);
    }
  }

  [[nodiscard]] const LearnerState& state() const noexcept { return state_; }
  [[nodiscard]] const Game& game() const noexcept { return *game_; }
  [[nodiscard]] std::uint64_t draws() const noexcept { return rng_.draws(); }
  [[nodiscard]] Algorithm algorithm() const noexcept { return algorithm_; }

  [[nodiscard]] TrajectoryPoint sample() const {
    const auto& s = state_;
    TrajectoryPoint p;
    p.iteration = s.iteration;
    const ProfileTotals exact = profile_totals(*game_, s.current);
    p.global_utility = global_utility(*game_, s.current, exact);
    p.potential = potential(*game_, s.current);
    p.average_snr = average_snr(*game_, s.current, exact);
    p.coverage_proportion = coverage_proportion(*game_, s.current, exact);
    p.active_flags = s.active_flags();
    return p;
  }

 private:
  Algorithm algorithm_;
  const Game* game_;
  LearnerParams params_;
  TauSchedule schedule_;
  Rng rng_;
  LearnerState state_;
  double omega_tau_ = std::numeric_limits<double>::quiet_NaN();
  double omega_ = 0.0;
};

struct RunRecord {
  Algorithm algorithm = Algorithm::pblla;
  LearnerParams params;
  DeltaBound delta;
  ChannelState channels;
  StrategyProfile initial_profile;
  StrategyProfile final_profile;
  std::vector<TrajectoryPoint> trajectory;
  std::uint64_t rng_draws = 0;
  double wall_seconds = 0.0;
};

/// Runs `params.max_iterations` steps from `initial`, sampling the trajectory
/// at iteration 0 and every `record_stride` iterations thereafter.
inline RunRecord run_learning(Algorithm algorithm, const Game& game, StrategyProfile initial,
                              const LearnerParams& params, const TauSchedule& schedule = {},
                              std::uint64_t record_stride = 1) {
  if (record_stride == 0) throw std::invalid_argument("record_stride must be positive");
  const auto started = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.algorithm = algorithm;
  rec.params = params;
  rec.delta = delta_bound(game.config());
  rec.channels = game.channels();
  rec.initial_profile = initial;

  Learner learner(algorithm, game, std::move(initial), params, schedule);
  rec.trajectory.reserve(1 + params.max_iterations / record_stride);
  rec.trajectory.push_back(learner.sample());
  for (std::uint64_t t = 1; t <= params.max_iterations; ++t) {
    learner.step();
    if (t % record_stride == 0) rec.trajectory.push_back(learner.sample());
  }
  rec.final_profile = learner.state().current;
  rec.rng_draws = learner.draws();
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

/// Deploys with `params.seed` and runs.
inline RunRecord run_learning(Algorithm algorithm, const GameConfig& config,
                              const LearnerParams& params, const TauSchedule& schedule = {},
                              std::uint64_t record_stride = 1) {
  auto [profile, channels] = init_deployment(config, params.seed);
  const Game game(config, std::move(channels));
  return run_learning(algorithm, game, std::move(profile), params, schedule, record_stride);
}

}  // namespace uavgame

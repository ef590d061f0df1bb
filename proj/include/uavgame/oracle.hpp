#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uavgame/game.hpp"
#include "uavgame/learning.hpp"
#include "uavgame/rng.hpp"
#include "uavgame/strategy.hpp"

namespace uavgame {

class BudgetExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct EnumerationBudget {
  std::uint64_t max_profiles = 1'000'000;
};

using ProfileId = std::uint64_t;

/// All profiles over a fixed channel assignment, ranked lexicographically by
/// (UAV id, power index, altitude index) with UAV 0 most significant.
class ProfileSpace {
 public:
  ProfileSpace(const Game& game, std::vector<ChannelMask> channels, EnumerationBudget budget = {})
      : game_(&game), channels_(std::move(channels)) {
    if (channels_.size() != game.uav_count())
      throw std::invalid_argument("channel assignment size does not match uav_count");
    levels_ = game.config().power_count() * game.config().altitude_count();
    size_ = 1;
    for (std::size_t i = 0; i < channels_.size(); ++i) {
      if (size_ > budget.max_profiles / levels_)
        throw BudgetExceeded("profile space (" + std::to_string(levels_) + ")^" +
                             std::to_string(channels_.size()) + " exceeds the budget of " +
                             std::to_string(budget.max_profiles));
      size_ *= levels_;
    }
    stride_.assign(channels_.size(), 1);
    for (std::size_t i = channels_.size(); i-- > 1;) stride_[i - 1] = stride_[i] * levels_;
  }

  [[nodiscard]] std::uint64_t size() const noexcept { return size_; }
  [[nodiscard]] std::uint64_t levels_per_uav() const noexcept { return levels_; }
  [[nodiscard]] std::size_t uav_count() const noexcept { return channels_.size(); }
  [[nodiscard]] const Game& game() const noexcept { return *game_; }
  [[nodiscard]] const std::vector<ChannelMask>& channels() const noexcept { return channels_; }

  /// Rank of strategy `s` within one UAV's level grid.
  [[nodiscard]] std::uint64_t level(const Strategy& s) const {
    return static_cast<std::uint64_t>(s.power) * game_->config().altitude_count() + s.altitude;
  }
  [[nodiscard]] std::uint64_t level_of(ProfileId id, std::size_t i) const {
    return (id / stride_[i]) % levels_;
  }
  /// Profile id after UAV i switches to level `to`.
  [[nodiscard]] ProfileId with_level(ProfileId id, std::size_t i, std::uint64_t to) const {
    return id - level_of(id, i) * stride_[i] + to * stride_[i];
  }

  [[nodiscard]] Strategy strategy(std::size_t i, std::uint64_t lvl) const {
    const auto nh = game_->config().altitude_count();
    return Strategy{channels_[i], static_cast<std::uint32_t>(lvl / nh),
                    static_cast<std::uint32_t>(lvl % nh)};
  }

  [[nodiscard]] StrategyProfile decode(ProfileId id) const {
    StrategyProfile out(channels_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = strategy(i, level_of(id, i));
    return out;
  }

  [[nodiscard]] ProfileId encode(const StrategyProfile& profile) const {
    ProfileId id = 0;
    for (std::size_t i = 0; i < profile.size(); ++i) id += level(profile[i]) * stride_[i];
    return id;
  }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = StrategyProfile;
    using difference_type = std::ptrdiff_t;
    using pointer = const StrategyProfile*;
    using reference = const StrategyProfile&;

    iterator() = default;
    iterator(const ProfileSpace* space, ProfileId id) : space_(space), id_(id) {
      if (space_ && id_ < space_->size()) current_ = space_->decode(id_);
    }
    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++() {
      ++id_;
      if (id_ < space_->size()) current_ = space_->decode(id_);
      return *this;
    }
    iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    [[nodiscard]] ProfileId id() const noexcept { return id_; }
    bool operator==(const iterator& other) const noexcept { return id_ == other.id_; }

   private:
    const ProfileSpace* space_ = nullptr;
    ProfileId id_ = 0;
    StrategyProfile current_;
  };

  [[nodiscard]] iterator begin() const { return {this, 0}; }
  [[nodiscard]] iterator end() const { return {this, size_}; }

 private:
  const Game* game_;
  std::vector<ChannelMask> channels_;
  std::uint64_t levels_ = 1;
  std::uint64_t size_ = 1;
  std::vector<std::uint64_t> stride_;
};

inline ProfileSpace enumerate_profiles(const Game& game, std::vector<ChannelMask> channels,
                                       EnumerationBudget budget = {}) {
  return ProfileSpace(game, std::move(channels), budget);
}

/// U_i for every profile and UAV, stored row-major by profile id.
class UtilityTable {
 public:
  explicit UtilityTable(const ProfileSpace& space)
      : uavs_(space.uav_count()), values_(space.size() * space.uav_count()) {
    for (auto it = space.begin(); it != space.end(); ++it) {
      const ProfileTotals totals = profile_totals(space.game(), *it);
      for (std::size_t i = 0; i < uavs_; ++i)
        values_[it.id() * uavs_ + i] = utility(space.game(), *it, totals, i).total;
    }
  }
  [[nodiscard]] double operator()(ProfileId id, std::size_t i) const { return values_[id * uavs_ + i]; }

 private:
  std::size_t uavs_;
  std::vector<double> values_;
};

/// Levels reachable from `lvl` in one constrained move, in neighbor_set order.
inline std::vector<std::uint64_t> neighbor_levels(const ProfileSpace& space, std::size_t i,
                                                  std::uint64_t lvl) {
  std::vector<std::uint64_t> out;
  for (const auto& s : neighbor_set(space.game().config(), space.strategy(i, lvl)))
    out.push_back(space.level(s));
  return out;
}

/// Precomputed constrained-move graph over one UAV's level grid (the same for
/// every UAV, since channels do not move).
inline std::vector<std::vector<std::uint64_t>> level_graph(const ProfileSpace& space) {
  std::vector<std::vector<std::uint64_t>> g(space.levels_per_uav());
  for (std::uint64_t lvl = 0; lvl < g.size(); ++lvl) g[lvl] = neighbor_levels(space, 0, lvl);
  return g;
}

namespace detail {

inline bool improves(double candidate, double incumbent) {
  const double scale = std::max({1.0, std::abs(candidate), std::abs(incumbent)});
  return candidate > incumbent + 1e-12 * scale;
}

}  // namespace detail

struct PsneReport {
  std::vector<ProfileId> full;   // no strictly improving deviation over the whole level grid
  std::vector<ProfileId> local;  // no strictly improving constrained one-step deviation
};

inline PsneReport brute_force_psne(const ProfileSpace& space) {
  const UtilityTable table(space);
  const auto graph = level_graph(space);
  PsneReport out;
  for (ProfileId id = 0; id < space.size(); ++id) {
    bool full = true;
    bool local = true;
    for (std::size_t i = 0; i < space.uav_count() && (full || local); ++i) {
      const double here = table(id, i);
      const std::uint64_t own = space.level_of(id, i);
      for (std::uint64_t lvl = 0; lvl < space.levels_per_uav() && full; ++lvl)
        if (lvl != own && detail::improves(table(space.with_level(id, i, lvl), i), here)) full = false;
      for (std::uint64_t lvl : graph[own])
        if (detail::improves(table(space.with_level(id, i, lvl), i), here)) local = false;
    }
    if (full) out.full.push_back(id);
    if (local) out.local.push_back(id);
  }
  return out;
}

inline constexpr double kMaximizerTieTolerance = 1e-9;

struct MaximizerSet {
  std::vector<ProfileId> profiles;
  double value = -std::numeric_limits<double>::infinity();
};

/// Argmax of the exact potential, ties within 1e-9 absolute kept.
inline MaximizerSet phi_maximizers(const ProfileSpace& space) {
  std::vector<double> phi(space.size());
  MaximizerSet out;
  for (auto it = space.begin(); it != space.end(); ++it) {
    phi[it.id()] = potential(space.game(), *it);
    out.value = std::max(out.value, phi[it.id()]);
  }
  for (ProfileId id = 0; id < space.size(); ++id)
    if (phi[id] >= out.value - kMaximizerTieTolerance) out.profiles.push_back(id);
  return out;
}

/// Largest |U_i(s') - U_i(s)| over every profile and constrained one-step move.
inline double max_unilateral_delta(const ProfileSpace& space) {
  const UtilityTable table(space);
  const auto graph = level_graph(space);
  double best = 0.0;
  for (ProfileId id = 0; id < space.size(); ++id)
    for (std::size_t i = 0; i < space.uav_count(); ++i)
      for (std::uint64_t lvl : graph[space.level_of(id, i)])
        best = std::max(best, std::abs(table(space.with_level(id, i, lvl), i) - table(id, i)));
  return best;
}

/// Outcome of comparing utility changes against potential changes.
struct PotentialCheck {
  std::uint64_t moves = 0;
  bool exhaustive = false;
  double exact_abs = 0.0;  // max |dU_i - dphi_exact|
  double exact_rel = 0.0;  // same, relative to max |U_i|, |phi| over the two profiles
  double printed_abs = 0.0;  // max |dU_i - dphi_printed|
  double printed_rel = 0.0;
  /// max mismatch between (dphi_printed - dU_i) and
  /// B (1 - mu) sum_n C_in dP_in + B alpha kappa (M - 1) dD_i, relative to the
  /// larger of the prediction and the magnitude of the differenced values.
  double closed_form_rel = 0.0;
  /// The move with the largest |dU_i - dphi_printed| and its predicted value.
  double worst_printed_discrepancy = 0.0;
  double worst_printed_predicted = 0.0;
};

/// Closed-form prediction of dphi_printed - dU_i for a unilateral move of one UAV.
inline double printed_potential_discrepancy(const Game& game, const Strategy& from, const Strategy& to) {
  const GameConfig& c = game.config();
  return c.balance_b * (1.0 - c.snr_index) * (game.total_power(to) - game.total_power(from)) +
         c.balance_b * c.coverage_tradeoff * c.overlap_index *
             static_cast<double>(c.uav_count - 1) * (game.coverage(to) - game.coverage(from));
}

namespace detail {

inline void record_move(const Game& game, const StrategyProfile& before, std::size_t i,
                        const Strategy& to, PotentialCheck& out) {
  StrategyProfile after = before;
  after[i] = to;
  const double u0 = utility(game, before, i).total;
  const double u1 = utility(game, after, i).total;
  const double e0 = potential(game, before, PotentialVariant::exact);
  const double e1 = potential(game, after, PotentialVariant::exact);
  const double p0 = potential(game, before, PotentialVariant::printed);
  const double p1 = potential(game, after, PotentialVariant::printed);
  const double du = u1 - u0;

  const double exact_err = std::abs(du - (e1 - e0));
  const double exact_scale = std::max({std::abs(u0), std::abs(u1), std::abs(e0), std::abs(e1), 1e-300});
  const double printed_gap = (p1 - p0) - du;
  const double printed_scale = std::max({std::abs(u0), std::abs(u1), std::abs(p0), std::abs(p1), 1e-300});
  const double predicted = printed_potential_discrepancy(game, before[i], to);
  const double closed_err =
      std::abs(printed_gap - predicted) / std::max(std::abs(predicted), printed_scale);

  ++out.moves;
  out.exact_abs = std::max(out.exact_abs, exact_err);
  out.exact_rel = std::max(out.exact_rel, exact_err / exact_scale);
  if (std::abs(printed_gap) > out.printed_abs) {
    out.worst_printed_discrepancy = printed_gap;
    out.worst_printed_predicted = predicted;
  }
  out.printed_abs = std::max(out.printed_abs, std::abs(printed_gap));
  out.printed_rel = std::max(out.printed_rel, std::abs(printed_gap) / printed_scale);
  out.closed_form_rel = std::max(out.closed_form_rel, closed_err);
}

}  // namespace detail

/// Total number of unilateral constrained moves over a profile space.
inline std::uint64_t unilateral_move_count(const ProfileSpace& space) {
  const auto graph = level_graph(space);
  std::uint64_t per_uav = 0;
  for (const auto& edges : graph) per_uav += edges.size();
  // Each UAV contributes per_uav moves for every configuration of the others.
  return per_uav * (space.size() / space.levels_per_uav()) * space.uav_count();
}

/// Compares utility and potential changes over every unilateral constrained
/// move of the game's own channel assignment.
inline PotentialCheck exact_potential_check(const ProfileSpace& space) {
  PotentialCheck out;
  out.exhaustive = true;
  const auto graph = level_graph(space);
  for (auto it = space.begin(); it != space.end(); ++it)
    for (std::size_t i = 0; i < space.uav_count(); ++i)
      for (std::uint64_t lvl : graph[space.level_of(it.id(), i)])
        detail::record_move(space.game(), *it, i, space.strategy(i, lvl), out);
  return out;
}

/// Deploys `config` with `seed`, then checks `trials` uniformly sampled
/// unilateral moves, or every move when there are no more than `trials`.
inline PotentialCheck exact_potential_check(const GameConfig& config, std::uint64_t trials,
                                            std::uint64_t seed) {
  auto [profile, channels] = init_deployment(config, seed);
  const Game game(config, std::move(channels));
  const auto masks = channel_assignment(profile);

  // Exhaust when the move set is small enough to enumerate.
  try {
    const ProfileSpace space(game, masks, EnumerationBudget{std::max<std::uint64_t>(trials, 1)});
    if (unilateral_move_count(space) <= trials) return exact_potential_check(space);
  } catch (const BudgetExceeded&) {
  }

  PotentialCheck out;
  Rng rng(seed, Stream::learning);
  StrategyProfile sample = profile;
  while (out.moves < trials) {
    for (auto& s : sample) {
      s.power = static_cast<std::uint32_t>(rng.index(config.power_count()));
      s.altitude = static_cast<std::uint32_t>(rng.index(config.altitude_count()));
    }
    const auto i = static_cast<std::size_t>(rng.index(config.uav_count));
    const std::size_t k = neighbor_count(config, sample[i]);
    if (k == 0) break;
    detail::record_move(game, sample, i, neighbor_at(config, sample[i], rng.index(k)), out);
  }
  return out;
}

/// Visit histogram of a learning chain over committed profiles (each
/// exploring UAV counted at the strategy it would revert to).
struct OccupancyReport {
  std::vector<std::uint64_t> visits;  // indexed by ProfileId
  std::uint64_t samples = 0;
  MaximizerSet maximizers;
  double maximizer_mass = 0.0;
  ProfileId top_profile = 0;
  double top_mass = 0.0;

  [[nodiscard]] double mass(ProfileId id) const {
    return samples == 0 ? 0.0 : static_cast<double>(visits.at(id)) / static_cast<double>(samples);
  }
};

inline OccupancyReport empirical_occupancy(const GameConfig& config, Algorithm algorithm,
                                           const LearnerParams& params, std::uint64_t burn_in,
                                           std::uint64_t samples, const TauSchedule& schedule = {},
                                           EnumerationBudget budget = {}) {
  auto [profile, channels] = init_deployment(config, params.seed);
  const Game game(config, std::move(channels));
  const ProfileSpace space(game, channel_assignment(profile), budget);

  OccupancyReport out;
  out.maximizers = phi_maximizers(space);
  out.visits.assign(space.size(), 0);
  Learner learner(algorithm, game, std::move(profile), params, schedule);
  for (std::uint64_t t = 0; t < burn_in; ++t) learner.step();
  for (std::uint64_t t = 0; t < samples; ++t) {
    learner.step();
    ++out.visits[space.encode(learner.state().committed_profile())];
  }
  out.samples = samples;
  for (ProfileId id : out.maximizers.profiles) out.maximizer_mass += out.mass(id);
  const auto top = std::max_element(out.visits.begin(), out.visits.end());
  out.top_profile = static_cast<ProfileId>(top - out.visits.begin());
  out.top_mass = out.mass(out.top_profile);
  return out;
}

// ---------------------------------------------------------------------------
// Exact stationary distribution of the augmented chain [s(t-1), s(t), x(t)].

struct AugmentedState {
  ProfileId previous = 0;
  ProfileId current = 0;
  std::uint64_t flags = 0;  // bit i set while UAV i explores

  auto operator<=>(const AugmentedState&) const = default;
};

struct StationaryReport {
  std::vector<AugmentedState> states;
  std::vector<double> probability;      // per augmented state
  std::vector<double> committed_mass;   // marginal over committed profiles, by ProfileId
  MaximizerSet maximizers;
  double maximizer_mass = 0.0;
};

namespace detail {

/// Grassmann-Taksar-Heyman elimination; subtraction-free, so it stays accurate
/// when transition probabilities span hundreds of orders of magnitude.
inline std::vector<double> gth_stationary(std::vector<std::vector<double>> p) {
  const std::size_t n = p.size();
  for (std::size_t k = n; k-- > 1;) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += p[k][j];
    if (!(s > 0.0)) throw std::domain_error("chain is reducible: stationary distribution is not unique");
    for (std::size_t i = 0; i < k; ++i) p[i][k] /= s;
    for (std::size_t i = 0; i < k; ++i) {
      const double a = p[i][k];
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < k; ++j) p[i][j] += a * p[k][j];
    }
  }
  std::vector<double> x(n, 0.0);
  x[0] = 1.0;
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t i = 0; i < k; ++i) x[k] += x[i] * p[i][k];
  double total = 0.0;
  for (double v : x) total += v;
  for (double& v : x) v /= total;
  return x;
}

}  // namespace detail

inline constexpr std::size_t kMaxAugmentedStates = 4096;

/// Builds every augmented state reachable from the rest states [s, s, 0] and
/// solves for the stationary distribution. The previous profile is
/// irrelevant while no UAV explores, so those states are keyed with
/// previous == current.
inline StationaryReport exact_stationary(const ProfileSpace& space, Algorithm algorithm, double tau,
                                         double m = 0.0, std::size_t max_states = kMaxAugmentedStates) {
  const std::size_t uavs = space.uav_count();
  if (uavs > 63) throw BudgetExceeded("too many UAVs for the augmented chain");
  const UtilityTable table(space);
  const auto graph = level_graph(space);
  const double omega = algorithm == Algorithm::spblla ? altering_probability(tau, m) : 0.0;

  std::map<AugmentedState, std::size_t> index;
  std::vector<AugmentedState> states;
  std::vector<std::vector<std::pair<std::size_t, double>>> edges;

  const auto intern = [&](AugmentedState z) {
    if (z.flags == 0) z.previous = z.current;
    auto [it, fresh] = index.emplace(z, states.size());
    if (fresh) {
      if (states.size() >= max_states)
        throw BudgetExceeded("augmented chain exceeds " + std::to_string(max_states) + " states");
      states.push_back(z);
    }
    return it->second;
  };

  for (ProfileId id = 0; id < space.size(); ++id) intern({id, id, 0});

  for (std::size_t k = 0; k < states.size(); ++k) {
    const AugmentedState z = states[k];
    std::map<std::size_t, double> out;
    const auto keep_prob = [&](std::size_t i) {
      return boltzmann_keep_probability(table(z.previous, i), table(z.current, i), tau);
    };

    if (algorithm == Algorithm::pblla) {
      if (z.flags == 0) {
        const double pick = 1.0 / static_cast<double>(uavs);
        for (std::size_t i = 0; i < uavs; ++i) {
          const auto& nb = graph[space.level_of(z.current, i)];
          if (nb.empty()) {
            out[intern({z.current, z.current, 0})] += pick;
            continue;
          }
          for (std::uint64_t lvl : nb)
            out[intern({z.current, space.with_level(z.current, i, lvl), std::uint64_t{1} << i})] +=
                pick / static_cast<double>(nb.size());
        }
      } else {
        std::size_t i = 0;
        while (!((z.flags >> i) & 1U)) ++i;
        const double keep = keep_prob(i);
        const ProfileId reverted = space.with_level(z.current, i, space.level_of(z.previous, i));
        out[intern({z.current, z.current, 0})] += keep;
        out[intern({z.current, reverted, 0})] += 1.0 - keep;
      }
    } else {
      // Cartesian product of independent per-UAV outcomes.
      struct Branch {
        ProfileId next;
        std::uint64_t flags;
        double prob;
      };
      std::vector<Branch> branches{{z.current, 0, 1.0}};
      for (std::size_t i = 0; i < uavs; ++i) {
        struct Option {
          std::uint64_t level;
          bool explore;
          double prob;
        };
        std::vector<Option> options;
        const std::uint64_t here = space.level_of(z.current, i);
        if ((z.flags >> i) & 1U) {
          const double keep = keep_prob(i);
          options.push_back({here, false, keep});
          options.push_back({space.level_of(z.previous, i), false, 1.0 - keep});
        } else {
          const auto& nb = graph[here];
          if (nb.empty()) {
            options.push_back({here, false, 1.0});
          } else {
            options.push_back({here, false, 1.0 - omega});
            for (std::uint64_t lvl : nb)
              options.push_back({lvl, true, omega / static_cast<double>(nb.size())});
          }
        }
        std::vector<Branch> grown;
        grown.reserve(branches.size() * options.size());
        for (const auto& b : branches)
          for (const auto& o : options) {
            if (o.prob == 0.0) continue;
            grown.push_back({space.with_level(b.next, i, o.level),
                             b.flags | (o.explore ? std::uint64_t{1} << i : 0), b.prob * o.prob});
          }
        branches = std::move(grown);
      }
      for (const auto& b : branches) out[intern({z.current, b.next, b.flags})] += b.prob;
    }
    edges.emplace_back(out.begin(), out.end());
  }

  const std::size_t n = states.size();
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k)
    for (const auto& [to, prob] : edges[k]) p[k][to] += prob;

  StationaryReport rep;
  rep.states = states;
  rep.probability = detail::gth_stationary(std::move(p));
  rep.committed_mass.assign(space.size(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    ProfileId committed = states[k].current;
    for (std::size_t i = 0; i < uavs; ++i)
      if ((states[k].flags >> i) & 1U)
        committed = space.with_level(committed, i, space.level_of(states[k].previous, i));
    rep.committed_mass[committed] += rep.probability[k];
  }
  rep.maximizers = phi_maximizers(space);
  for (ProfileId id : rep.maximizers.profiles) rep.maximizer_mass += rep.committed_mass[id];
  return rep;
}

}  // namespace uavgame

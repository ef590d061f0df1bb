#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "uavgame/game.hpp"

namespace uavgame {

/// One recorded sample of a learning run.
struct TrajectoryPoint {
  std::uint64_t iteration = 0;
  double global_utility = 0.0;
  double potential = 0.0;  // exact variant
  double average_snr = 0.0;
  double coverage_proportion = 0.0;
  std::uint64_t active_flags = 0;

  bool operator==(const TrajectoryPoint&) const = default;
};

/// Mean over UAVs of each UAV's mean SNR across its selected channels (linear, not dB).
inline double average_snr(const Game& game, const StrategyProfile& profile,
                          const ProfileTotals& totals) {
  if (profile.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : profile) {
    const double p = game.power(s);
    double own = 0.0;
    std::size_t used = 0;
    for (std::size_t n = 0; n < game.channel_count(); ++n) {
      if (!s.channels.test(n)) continue;
      own += p / (totals.channel_load[n] - p);
      ++used;
    }
    if (used > 0) sum += own / static_cast<double>(used);
  }
  return sum / static_cast<double>(profile.size());
}

inline double average_snr(const Game& game, const StrategyProfile& profile) {
  if (profile.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    double own = 0.0;
    std::size_t used = 0;
    for (std::size_t n = 0; n < game.channel_count(); ++n) {
      if (!profile[i].channels.test(n)) continue;
      own += snr(game, profile, i, n);
      ++used;
    }
    if (used > 0) sum += own / static_cast<double>(used);
  }
  return sum / static_cast<double>(profile.size());
}

/// Total effective (overlap-corrected) coverage over the mission area, clamped to [0, 1].
inline double coverage_proportion(const Game& game, const StrategyProfile& profile,
                                  const ProfileTotals& totals) {
  const double kappa = game.config().overlap_index;
  double effective = 0.0;
  for (const auto& s : profile) {
    const double d = game.coverage(s);
    effective += d - kappa * (totals.coverage_sum - d);
  }
  return std::clamp(effective / game.config().area, 0.0, 1.0);
}

inline double coverage_proportion(const Game& game, const StrategyProfile& profile) {
  return coverage_proportion(game, profile, profile_totals(game, profile));
}

/// Shannon capacity B log2(1 + SNR); `bandwidth` is independent of the balance index B.
inline double shannon_capacity(double bandwidth, double snr_linear) {
  return bandwidth * std::log2(1.0 + snr_linear);
}

struct FluctuationStats {
  double mean = 0.0;
  double max_abs_deviation = 0.0;
  double std_deviation = 0.0;  // population
};

/// Statistics of the last `window` samples around their own mean.
inline FluctuationStats fluctuation_stats(std::span<const double> series, std::size_t window) {
  if (window == 0) throw std::invalid_argument("fluctuation window is empty");
  if (window > series.size())
    throw std::invalid_argument("fluctuation window exceeds the series length");
  const auto tail = series.last(window);
  FluctuationStats out;
  for (double v : tail) out.mean += v;
  out.mean /= static_cast<double>(window);
  double sq = 0.0;
  for (double v : tail) {
    const double d = v - out.mean;
    out.max_abs_deviation = std::max(out.max_abs_deviation, std::abs(d));
    sq += d * d;
  }
  out.std_deviation = std::sqrt(sq / static_cast<double>(window));
  return out;
}

/// Number of trailing samples that make up a tail of `fraction` of the series (at least one).
inline std::size_t tail_length(std::size_t size, double fraction) {
  if (size == 0) return 0;
  const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(size)));
  return std::clamp<std::size_t>(n, 1, size);
}

inline double tail_mean(std::span<const double> series, double fraction = 0.1) {
  const std::size_t n = tail_length(series.size(), fraction);
  if (n == 0) throw std::invalid_argument("tail mean of an empty series");
  double sum = 0.0;
  for (double v : series.last(n)) sum += v;
  return sum / static_cast<double>(n);
}

/// Index of the first sample after which the trailing moving average over
/// `window` samples stays at or above `fraction * target` through the end of
/// the series. The first eligible index is window - 1.
inline std::optional<std::size_t> convergence_index(std::span<const double> series, double fraction,
                                                    std::size_t window, double target) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("convergence fraction must lie in (0, 1]");
  if (window == 0) throw std::invalid_argument("convergence window must be positive");
  if (series.size() < window) return std::nullopt;
  const double threshold = fraction * target;

  double sum = 0.0;
  for (std::size_t k = 0; k < window; ++k) sum += series[k];
  std::optional<std::size_t> last_below;
  for (std::size_t k = window - 1;; ++k) {
    if (sum / static_cast<double>(window) < threshold) last_below = k;
    if (k + 1 == series.size()) break;
    sum += series[k + 1] - series[k + 1 - window];
  }
  if (!last_below) return window - 1;
  if (*last_below + 1 >= series.size()) return std::nullopt;
  return *last_below + 1;
}

/// Convergence iteration of a run's global utility, with the target set to
/// the mean of the last `tail_fraction` of the recorded points.
inline std::optional<std::uint64_t> convergence_iteration(std::span<const TrajectoryPoint> series,
                                                          double fraction, std::size_t window,
                                                          double tail_fraction = 0.1) {
  std::vector<double> values;
  values.reserve(series.size());
  for (const auto& p : series) values.push_back(p.global_utility);
  if (values.empty()) return std::nullopt;
  const auto k = convergence_index(values, fraction, window, tail_mean(values, tail_fraction));
  if (!k) return std::nullopt;
  return series[*k].iteration;
}

inline std::vector<double> utility_series(std::span<const TrajectoryPoint> series) {
  std::vector<double> out;
  out.reserve(series.size());
  for (const auto& p : series) out.push_back(p.global_utility);
  return out;
}

}  // namespace uavgame

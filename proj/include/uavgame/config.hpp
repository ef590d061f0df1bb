#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace uavgame {

/// Upper bound on the channel count; channel selections are stored as fixed-width bitsets.
inline constexpr std::size_t kMaxChannels = 128;

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> failures)
      : std::runtime_error(join(failures)), failures_(std::move(failures)) {}

  [[nodiscard]] const std::vector<std::string>& failures() const noexcept { return failures_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "invalid configuration:";
    for (const auto& item : items) out += "\n  - " + item;
    return out;
  }

  std::vector<std::string> failures_;
};

/// Every constant of one scenario. Units: watts for power and noise, kilometres
/// for altitude, km^2 for area, radians for the field angle.
struct GameConfig {
  std::size_t uav_count = 2;
  std::size_t channel_count = 1;
  std::size_t channel_capacity = 2;
  std::size_t channels_per_uav = 1;
  std::vector<double> power_levels{0.5, 1.0};
  std::vector<double> altitude_levels{1.0, 2.0};
  double field_angle = std::numbers::pi / 4.0;
  double battery = 1.0;
  double area = 100.0;
  double balance_a = 1.0;
  double balance_b = 1.0;
  double balance_c = 1.0;
  double snr_balance = 0.0;        // gamma
  double snr_index = 1.0;          // mu
  double coverage_tradeoff = 0.0;  // alpha
  double overlap_index = 0.0;      // kappa
  std::vector<double> turbulence{1.0, 1.0};
  std::pair<double, double> noise_range{0.5, 0.5};

  [[nodiscard]] std::size_t power_count() const noexcept { return power_levels.size(); }
  [[nodiscard]] std::size_t altitude_count() const noexcept { return altitude_levels.size(); }

  /// Gap between adjacent power levels; 0 for a single-level grid.
  [[nodiscard]] double power_step() const noexcept {
    return power_levels.size() < 2 ? 0.0 : power_levels[1] - power_levels[0];
  }
  [[nodiscard]] double altitude_step() const noexcept {
    return altitude_levels.size() < 2 ? 0.0 : altitude_levels[1] - altitude_levels[0];
  }

  bool operator==(const GameConfig&) const = default;
};

struct ValidationReport {
  std::vector<std::string> failures;

  [[nodiscard]] bool ok() const noexcept { return failures.empty(); }
  explicit operator bool() const noexcept { return ok(); }

  /// Throws ValidationError when any check failed.
  void throw_if_failed() const {
    if (!ok()) throw ValidationError(failures);
  }
};

namespace detail {

template <typename T>
std::string str(const T& value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  return os.str();
}

inline std::string list_str(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k != 0) out += ", ";
    out += str(values[k]);
  }
  return out + "]";
}

// Strictly increasing, positive, with a constant gap to 1e-12 relative.
inline void check_grid(const std::vector<double>& grid, const char* name,
                       std::vector<std::string>& failures) {
  if (grid.empty()) {
    failures.push_back(std::string(name) + " must not be empty");
    return;
  }
  for (double v : grid) {
    if (!std::isfinite(v) || v <= 0.0) {
      failures.push_back(std::string(name) + " must be finite and positive: " + list_str(grid));
      return;
    }
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      failures.push_back(std::string(name) + " must be strictly increasing: " + list_str(grid));
      return;
    }
  }
  if (grid.size() < 3) return;
  const double gap = grid[1] - grid[0];
  for (std::size_t k = 2; k < grid.size(); ++k) {
    const double g = grid[k] - grid[k - 1];
    const double scale = std::max(std::abs(grid[k]), std::abs(gap));
    if (std::abs(g - gap) > 1e-12 * scale) {
      failures.push_back(std::string(name) + " must have a uniform gap: step " + str(k) +
                         " is " + str(g) + ", first step is " + str(gap));
      return;
    }
  }
}

}  // namespace detail

/// Collects every violated invariant instead of stopping at the first one.
inline ValidationReport validate_config(const GameConfig& c) {
  using detail::str;
  std::vector<std::string> f;

  if (c.uav_count == 0) f.push_back("uav_count must be positive");
  if (c.channel_count == 0) f.push_back("channel_count must be positive");
  if (c.channel_count > kMaxChannels)
    f.push_back("channel_count " + str(c.channel_count) + " exceeds the supported maximum " +
                str(kMaxChannels));
  if (c.channel_capacity == 0) f.push_back("channel_capacity must be positive");
  if (c.channels_per_uav == 0 || c.channels_per_uav > c.channel_count)
    f.push_back("channels_per_uav must lie in [1, channel_count]: got " + str(c.channels_per_uav) +
                " with channel_count " + str(c.channel_count));

  detail::check_grid(c.power_levels, "power_levels", f);
  detail::check_grid(c.altitude_levels, "altitude_levels", f);

  if (!(c.field_angle > 0.0 && c.field_angle < std::numbers::pi / 2.0))
    f.push_back("field_angle must lie in (0, pi/2) radians: got " + str(c.field_angle));
  if (!(std::isfinite(c.battery) && c.battery > 0.0))
    f.push_back("battery must be finite and positive: got " + str(c.battery));
  if (!(std::isfinite(c.area) && c.area > 0.0))
    f.push_back("area must be finite and positive: got " + str(c.area));

  const std::pair<const char*, double> scalars[] = {
      {"balance_a", c.balance_a},
      {"balance_b", c.balance_b},
      {"balance_c", c.balance_c},
      {"snr_balance", c.snr_balance},
      {"snr_index", c.snr_index},
      {"coverage_tradeoff", c.coverage_tradeoff},
  };
  for (const auto& [name, value] : scalars)
    if (!std::isfinite(value)) f.push_back(std::string(name) + " must be finite");
  if (!(std::isfinite(c.overlap_index) && c.overlap_index >= 0.0))
    f.push_back("overlap_index must be finite and non-negative: got " + str(c.overlap_index));

  // Channel feasibility: M * N_C slots against N * C_max seats.
  if (c.channel_count > 0 && c.channels_per_uav > 0 &&
      c.uav_count * c.channels_per_uav > c.channel_capacity * c.channel_count)
    f.push_back("infeasible channel assignment: uav_count * channels_per_uav = " +
                str(c.uav_count * c.channels_per_uav) + " exceeds channel_capacity * channel_count = " +
                str(c.channel_capacity * c.channel_count));

  if (c.turbulence.size() != c.altitude_levels.size()) {
    f.push_back("turbulence must hold one value per altitude level: got " +
                str(c.turbulence.size()) + " values for " + str(c.altitude_levels.size()) +
                " levels");
  } else {
    for (double b : c.turbulence)
      if (!(b > 0.0 && b <= 1.0)) {
        f.push_back("turbulence values must lie in (0, 1]: " + detail::list_str(c.turbulence));
        break;
      }
    for (std::size_t k = 1; k < c.turbulence.size(); ++k)
      if (c.turbulence[k] > c.turbulence[k - 1]) {
        f.push_back("turbulence must be non-increasing in altitude: " +
                    detail::list_str(c.turbulence));
        break;
      }
  }

  const auto [lo, hi] = c.noise_range;
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && lo <= hi))
    f.push_back("noise_range must satisfy 0 <= lo <= hi: got [" + str(lo) + ", " + str(hi) + "]");

  // Effective coverage must stay positive even at the worst overlap.
  if (!c.altitude_levels.empty() && c.uav_count > 0 && c.field_angle > 0.0 &&
      c.field_angle < std::numbers::pi / 2.0) {
    const double t = std::tan(c.field_angle);
    const double smallest = std::numbers::pi * std::pow(c.altitude_levels.front() * t, 2);
    const double largest = std::numbers::pi * std::pow(c.altitude_levels.back() * t, 2);
    const double worst_overlap =
        c.overlap_index * static_cast<double>(c.uav_count - 1) * largest;
    if (!(worst_overlap < smallest))
      f.push_back("overlap too strong for positive effective coverage: kappa*(M-1)*D_max = " +
                  str(worst_overlap) + " must be below D_min = " + str(smallest));
  }

  return ValidationReport{std::move(f)};
}

/// Linear ramp from `first` at the lowest altitude level to `last` at the highest.
inline std::vector<double> turbulence_ramp(std::size_t levels, double first, double last) {
  std::vector<double> out(levels, first);
  if (levels < 2) return out;
  for (std::size_t k = 0; k < levels; ++k)
    out[k] = first + (last - first) * static_cast<double>(k) / static_cast<double>(levels - 1);
  return out;
}

/// `count` levels starting at `first` with gap `step`, computed as first + k*step.
inline std::vector<double> uniform_grid(double first, double step, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = first + step * static_cast<double>(k);
  return out;
}

}  // namespace uavgame

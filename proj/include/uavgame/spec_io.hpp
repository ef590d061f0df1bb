#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "uavgame/config.hpp"
#include "uavgame/learning.hpp"
#include "uavgame/metrics.hpp"
#include "uavgame/scenarios.hpp"

namespace uavgame {

struct AnalysisParams {
  double tail_fraction = 0.1;
  double convergence_fraction = 0.9;
  std::size_t convergence_window = 30;  // recorded points

  bool operator==(const AnalysisParams&) const = default;
};

enum class SweepAxis { none, tau, m, uav_count };

inline std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::tau: return "tau";
    case SweepAxis::m: return "m";
    case SweepAxis::uav_count: return "uav_count";
    case SweepAxis::none: break;
  }
  return "none";
}

inline SweepAxis parse_axis(std::string_view text) {
  if (text == "tau") return SweepAxis::tau;
  if (text == "m") return SweepAxis::m;
  if (text == "uav_count") return SweepAxis::uav_count;
  if (text == "none") return SweepAxis::none;
  throw std::invalid_argument("unknown sweep axis '" + std::string(text) + "' (expected tau, m or uav_count)");
}

struct SweepParams {
  SweepAxis axis = SweepAxis::none;
  std::vector<double> values;
  std::uint64_t seeds = 1;

  bool operator==(const SweepParams&) const = default;
};

/// A fully resolved experiment.
struct ExperimentSpec {
  std::string preset;  // empty when the game block is spelled out
  GameConfig game;
  Algorithm algorithm = Algorithm::pblla;
  LearnerParams params;
  double m_factor = 0.0;  // when positive, m = m_factor * 2 * Delta(game)
  TauSchedule schedule;
  std::uint64_t record_stride = 1;
  std::string output_path = "run.csv";
  AnalysisParams analysis;
  SweepParams sweep;

  bool operator==(const ExperimentSpec&) const = default;
};

class SpecParseError : public std::runtime_error {
 public:
  SpecParseError(const std::string& origin, std::size_t line, const std::string& what)
      : std::runtime_error(origin + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  /// 1-based line of the offending entry; 0 for whole-file errors.
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Game block of a named preset.
inline GameConfig preset_config(std::string_view name) {
  if (name == "tiny2") return scenarios::tiny2();
  if (name == "coupled_tiny") return scenarios::coupled_tiny();
  if (name == "coupled_three") return scenarios::coupled_three();
  if (name == "single_uav") return scenarios::single_uav();
  if (name == "errata") return scenarios::errata();
  if (name == "field") return scenarios::field();
  if (name == "desk") return scenarios::desk();
  throw std::invalid_argument("unknown preset '" + std::string(name) +
                              "' (expected tiny2, coupled_tiny, coupled_three, single_uav, errata, "
                              "field or desk)");
}

/// %.17g, the shortest fixed format that round-trips every double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

struct Entry {
  std::string value;
  std::size_t line = 0;
};

class SpecReader {
 public:
  SpecReader(std::map<std::string, Entry> entries, std::string origin)
      : entries_(std::move(entries)), origin_(std::move(origin)) {}

  [[nodiscard]] bool has(const std::string& key) const { return entries_.count(key) != 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const auto it = entries_.find(key);
    throw SpecParseError(origin_, it == entries_.end() ? 0 : it->second.line, key + ": " + what);
  }

  const Entry& take(const std::string& key) {
    used_.push_back(key);
    return entries_.at(key);
  }

  double real(const std::string& key) { return parse_real(key, take(key).value); }

  std::uint64_t integer(const std::string& key) { return parse_integer(key, take(key).value); }

  bool boolean(const std::string& key) {
    const std::string& v = take(key).value;
    if (v == "true") return true;
    if (v == "false") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }

  std::string text(const std::string& key) {
    const std::string& v = take(key).value;
    if (v.empty()) fail(key, "empty value");
    return v;
  }

  std::vector<double> reals(const std::string& key) {
    std::vector<double> out;
    for (auto item : split(take(key).value, ',')) out.push_back(parse_real(key, item));
    return out;
  }

  std::vector<double> reals(const std::string& key, std::size_t expected) {
    auto out = reals(key);
    if (out.size() != expected)
      fail(key, "expected " + std::to_string(expected) + " values, got " + std::to_string(out.size()));
    return out;
  }

  void require(const std::string& key) const {
    if (!has(key)) throw SpecParseError(origin_, 0, "missing required key '" + key + "'");
  }

  /// Keys never consumed are unknown.
  void reject_unused() const {
    for (const auto& [key, entry] : entries_)
      if (std::find(used_.begin(), used_.end(), key) == used_.end())
        throw SpecParseError(origin_, entry.line, "unknown key '" + key + "'");
  }

  double parse_real(const std::string& key, std::string_view text) const {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
      fail(key, "expected a number, got '" + std::string(text) + "'");
    if (!std::isfinite(v)) fail(key, "value must be finite");
    return v;
  }

  std::uint64_t parse_integer(const std::string& key, std::string_view text) const {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
      fail(key, "expected a non-negative integer, got '" + std::string(text) + "'");
    return v;
  }

 private:
  std::map<std::string, Entry> entries_;
  std::string origin_;
  std::vector<std::string> used_;
};

inline std::map<std::string, Entry> tokenize(std::string_view text, const std::string& origin) {
  std::map<std::string, Entry> entries;
  std::size_t line_no = 0;
  for (std::string_view rest = text; !rest.empty();) {
    ++line_no;
    const auto eol = rest.find('\n');
    std::string_view line = rest.substr(0, eol);
    rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 1);
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw SpecParseError(origin, line_no, "expected 'key = value', got '" + std::string(line) + "'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw SpecParseError(origin, line_no, "missing key before '='");
    if (key.find_first_of(" \t") != std::string::npos)
      throw SpecParseError(origin, line_no, "key '" + key + "' contains whitespace");
    if (value.empty()) throw SpecParseError(origin, line_no, key + ": missing value");
    if (const auto prev = entries.find(key); prev != entries.end())
      throw SpecParseError(origin, line_no,
                           "duplicate key '" + key + "' (first set on line " +
                               std::to_string(prev->second.line) + ")");
    entries.emplace(key, Entry{value, line_no});
  }
  return entries;
}

inline std::vector<double> read_grid(SpecReader& r, const std::string& list_key, const std::string& grid_key,
                                     std::vector<double> fallback, bool required) {
  if (r.has(list_key) && r.has(grid_key)) r.fail(grid_key, "conflicts with " + list_key);
  if (r.has(list_key)) return r.reals(list_key);
  if (r.has(grid_key)) {
    const auto g = r.reals(grid_key, 3);
    if (!(g[2] >= 1.0 && g[2] == std::floor(g[2]))) r.fail(grid_key, "count must be a positive integer");
    return uniform_grid(g[0], g[1], static_cast<std::size_t>(g[2]));
  }
  if (required) r.require(list_key);
  return fallback;
}

}  // namespace detail

/// Parses the key-value experiment format documented in docs/config_format.md.
inline ExperimentSpec parse_spec(std::string_view text, const std::string& origin = "<spec>") {
  auto entries = detail::tokenize(text, origin);
  if (entries.empty())
    throw SpecParseError(origin, 0, "empty spec: missing required keys learner.algorithm and learner.max_iterations");
  detail::SpecReader r(std::move(entries), origin);
  ExperimentSpec spec;

  // With a preset every game key is an override; without one the structural
  // keys must all be present.
  const bool preset = r.has("preset");
  if (preset) {
    spec.preset = r.text("preset");
    try {
      spec.game = preset_config(spec.preset);
    } catch (const std::invalid_argument& e) {
      r.fail("preset", e.what());
    }
  } else {
    spec.game = GameConfig{};
    spec.game.snr_balance = spec.game.coverage_tradeoff = spec.game.overlap_index = 0.0;
  }
  GameConfig& g = spec.game;

  const auto count = [&](const std::string& key, std::size_t& field) {
    if (r.has(key)) field = static_cast<std::size_t>(r.integer(key));
    else if (!preset) r.require(key);
  };
  count("game.uav_count", g.uav_count);
  count("game.channel_count", g.channel_count);
  count("game.channel_capacity", g.channel_capacity);
  count("game.channels_per_uav", g.channels_per_uav);

  g.power_levels = detail::read_grid(r, "game.power_levels", "game.power_grid", g.power_levels, !preset);
  const bool altitude_changed = r.has("game.altitude_levels") || r.has("game.altitude_grid");
  g.altitude_levels =
      detail::read_grid(r, "game.altitude_levels", "game.altitude_grid", g.altitude_levels, !preset);

  if (r.has("game.field_angle_deg") && r.has("game.field_angle_rad"))
    r.fail("game.field_angle_rad", "conflicts with game.field_angle_deg");
  if (r.has("game.field_angle_deg")) g.field_angle = r.real("game.field_angle_deg") * std::numbers::pi / 180.0;
  else if (r.has("game.field_angle_rad")) g.field_angle = r.real("game.field_angle_rad");
  else if (!preset) r.require("game.field_angle_deg");

  const auto scalar = [&](const std::string& key, double& field, bool required) {
    if (r.has(key)) field = r.real(key);
    else if (required && !preset) r.require(key);
  };
  scalar("game.battery", g.battery, true);
  scalar("game.area", g.area, true);
  scalar("game.balance_a", g.balance_a, false);
  scalar("game.balance_b", g.balance_b, false);
  scalar("game.balance_c", g.balance_c, false);
  scalar("game.snr_balance", g.snr_balance, false);
  scalar("game.snr_index", g.snr_index, false);
  scalar("game.coverage_tradeoff", g.coverage_tradeoff, false);
  scalar("game.overlap_index", g.overlap_index, false);

  if (r.has("game.turbulence") && r.has("game.turbulence_ramp"))
    r.fail("game.turbulence_ramp", "conflicts with game.turbulence");
  if (r.has("game.turbulence")) {
    g.turbulence = r.reals("game.turbulence");
  } else if (r.has("game.turbulence_ramp")) {
    const auto ramp = r.reals("game.turbulence_ramp", 2);
    g.turbulence = turbulence_ramp(g.altitude_levels.size(), ramp[0], ramp[1]);
  } else if (!preset || altitude_changed) {
    g.turbulence.assign(g.altitude_levels.size(), 1.0);
  }

  if (r.has("game.noise_range")) {
    const auto nr = r.reals("game.noise_range", 2);
    g.noise_range = {nr[0], nr[1]};
  } else if (!preset) {
    r.require("game.noise_range");
  }

  r.require("learner.algorithm");
  try {
    spec.algorithm = parse_algorithm(r.text("learner.algorithm"));
  } catch (const std::invalid_argument& e) {
    r.fail("learner.algorithm", e.what());
  }
  r.require("learner.max_iterations");
  spec.params.max_iterations = r.integer("learner.max_iterations");
  if (r.has("learner.tau")) spec.params.tau = r.real("learner.tau");
  if (r.has("learner.m")) spec.params.m = r.real("learner.m");
  if (r.has("learner.m_factor")) spec.m_factor = r.real("learner.m_factor");
  if (r.has("learner.seed")) spec.params.seed = r.integer("learner.seed");
  if (r.has("learner.allow_m_below_bound"))
    spec.params.allow_m_below_bound = r.boolean("learner.allow_m_below_bound");
  if (r.has("learner.tau_schedule")) {
    for (auto item : detail::split(r.take("learner.tau_schedule").value, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string_view::npos)
        r.fail("learner.tau_schedule", "expected 'iteration:tau' pairs, got '" + std::string(item) + "'");
      spec.schedule.steps.emplace_back(
          r.parse_integer("learner.tau_schedule", detail::trim(item.substr(0, colon))),
          r.parse_real("learner.tau_schedule", detail::trim(item.substr(colon + 1))));
    }
    for (std::size_t k = 1; k < spec.schedule.steps.size(); ++k)
      if (!(spec.schedule.steps[k].first > spec.schedule.steps[k - 1].first))
        r.fail("learner.tau_schedule", "iterations must be strictly increasing");
  }

  if (r.has("output.record_stride")) spec.record_stride = r.integer("output.record_stride");
  if (r.has("output.path")) spec.output_path = r.text("output.path");

  if (r.has("analysis.tail_fraction")) spec.analysis.tail_fraction = r.real("analysis.tail_fraction");
  if (r.has("analysis.convergence_fraction"))
    spec.analysis.convergence_fraction = r.real("analysis.convergence_fraction");
  if (r.has("analysis.convergence_window"))
    spec.analysis.convergence_window = static_cast<std::size_t>(r.integer("analysis.convergence_window"));

  if (r.has("sweep.axis")) {
    try {
      spec.sweep.axis = parse_axis(r.text("sweep.axis"));
    } catch (const std::invalid_argument& e) {
      r.fail("sweep.axis", e.what());
    }
  }
  if (r.has("sweep.values")) spec.sweep.values = r.reals("sweep.values");
  if (r.has("sweep.seeds")) spec.sweep.seeds = r.integer("sweep.seeds");

  r.reject_unused();
  if (spec.m_factor > 0.0) {
    try {
      spec.params.m = spec.m_factor * delta_bound(spec.game).minimum_m;
    } catch (const ValidationError&) {
      // Reported by validate_spec with the full failure list.
    }
  }
  return spec;
}

/// Every invariant the spec must satisfy before a run, including the
/// synchronous learner's m bound.
inline ValidationReport validate_spec(const ExperimentSpec& spec) {
  ValidationReport report = validate_config(spec.game);
  auto& f = report.failures;
  const auto& p = spec.params;
  if (!(p.tau > 0.0)) f.push_back("learner.tau must be positive: got " + format_double(p.tau));
  for (const auto& [from, tau] : spec.schedule.steps)
    if (!(tau > 0.0))
      f.push_back("learner.tau_schedule entry at iteration " + std::to_string(from) + " must be positive");
  if (!(p.m >= 0.0)) f.push_back("learner.m must be non-negative: got " + format_double(p.m));
  if (spec.m_factor < 0.0) f.push_back("learner.m_factor must be non-negative");
  if (spec.algorithm == Algorithm::spblla && report.ok() && !p.allow_m_below_bound) {
    const DeltaBound b = delta_bound(spec.game);
    if (!(p.m > b.minimum_m))
      f.push_back("learner.m = " + format_double(p.m) + " must exceed 2*Delta = " +
                  format_double(b.minimum_m) +
                  " for the synchronous learner to converge (set learner.allow_m_below_bound = true to override)");
  }
  if (spec.record_stride == 0) f.push_back("output.record_stride must be positive");
  if (spec.output_path.empty()) f.push_back("output.path must not be empty");
  const auto& a = spec.analysis;
  if (!(a.tail_fraction > 0.0 && a.tail_fraction <= 1.0))
    f.push_back("analysis.tail_fraction must lie in (0, 1]: got " + format_double(a.tail_fraction));
  if (!(a.convergence_fraction > 0.0 && a.convergence_fraction <= 1.0))
    f.push_back("analysis.convergence_fraction must lie in (0, 1]: got " +
                format_double(a.convergence_fraction));
  if (a.convergence_window == 0) f.push_back("analysis.convergence_window must be positive");
  if (spec.sweep.seeds == 0) f.push_back("sweep.seeds must be positive");
  if (spec.sweep.axis == SweepAxis::uav_count)
    for (double v : spec.sweep.values)
      if (!(v >= 1.0 && v == std::floor(v)))
        f.push_back("sweep.values for uav_count must be positive integers: got " + format_double(v));
  return report;
}

inline ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecParseError(path.string(), 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str(), path.string());
}

namespace detail {

inline std::string join_reals(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k != 0) out += ", ";
    out += format_double(values[k]);
  }
  return out;
}

}  // namespace detail

/// Serialises every resolved value so that parse_spec(write_spec(s)) == s.
inline std::string write_spec(const ExperimentSpec& spec) {
  std::ostringstream o;
  const GameConfig& g = spec.game;
  o << "# resolved experiment spec\n";
  if (!spec.preset.empty()) o << "preset = " << spec.preset << "\n";
  o << "game.uav_count = " << g.uav_count << "\n"
    << "game.channel_count = " << g.channel_count << "\n"
    << "game.channel_capacity = " << g.channel_capacity << "\n"
    << "game.channels_per_uav = " << g.channels_per_uav << "\n"
    << "game.power_levels = " << detail::join_reals(g.power_levels) << "\n"
    << "game.altitude_levels = " << detail::join_reals(g.altitude_levels) << "\n"
    << "game.field_angle_rad = " << format_double(g.field_angle) << "\n"
    << "game.battery = " << format_double(g.battery) << "\n"
    << "game.area = " << format_double(g.area) << "\n"
    << "game.balance_a = " << format_double(g.balance_a) << "\n"
    << "game.balance_b = " << format_double(g.balance_b) << "\n"
    << "game.balance_c = " << format_double(g.balance_c) << "\n"
    << "game.snr_balance = " << format_double(g.snr_balance) << "\n"
    << "game.snr_index = " << format_double(g.snr_index) << "\n"
    << "game.coverage_tradeoff = " << format_double(g.coverage_tradeoff) << "\n"
    << "game.overlap_index = " << format_double(g.overlap_index) << "\n"
    << "game.turbulence = " << detail::join_reals(g.turbulence) << "\n"
    << "game.noise_range = " << format_double(g.noise_range.first) << ", "
    << format_double(g.noise_range.second) << "\n";
  o << "learner.algorithm = " << to_string(spec.algorithm) << "\n"
    << "learner.tau = " << format_double(spec.params.tau) << "\n"
    << "learner.m = " << format_double(spec.params.m) << "\n";
  if (spec.m_factor > 0.0) o << "learner.m_factor = " << format_double(spec.m_factor) << "\n";
  o << "learner.max_iterations = " << spec.params.max_iterations << "\n"
    << "learner.seed = " << spec.params.seed << "\n"
    << "learner.allow_m_below_bound = " << (spec.params.allow_m_below_bound ? "true" : "false") << "\n";
  if (!spec.schedule.steps.empty()) {
    o << "learner.tau_schedule = ";
    for (std::size_t k = 0; k < spec.schedule.steps.size(); ++k)
      o << (k ? ", " : "") << spec.schedule.steps[k].first << ":"
        << format_double(spec.schedule.steps[k].second);
    o << "\n";
  }
  o << "output.record_stride = " << spec.record_stride << "\n"
    << "output.path = " << spec.output_path << "\n"
    << "analysis.tail_fraction = " << format_double(spec.analysis.tail_fraction) << "\n"
    << "analysis.convergence_fraction = " << format_double(spec.analysis.convergence_fraction) << "\n"
    << "analysis.convergence_window = " << spec.analysis.convergence_window << "\n";
  if (spec.sweep.axis != SweepAxis::none) o << "sweep.axis = " << to_string(spec.sweep.axis) << "\n";
  if (!spec.sweep.values.empty()) o << "sweep.values = " << detail::join_reals(spec.sweep.values) << "\n";
  o << "sweep.seeds = " << spec.sweep.seeds << "\n";
  return o.str();
}

inline constexpr std::string_view kTrajectoryHeader =
    "iteration,global_utility,potential,avg_snr,coverage_proportion,active_flags";

inline void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryPoint> points) {
  out << kTrajectoryHeader << '\n';
  for (const auto& p : points)
    out << p.iteration << ',' << format_double(p.global_utility) << ',' << format_double(p.potential)
        << ',' << format_double(p.average_snr) << ',' << format_double(p.coverage_proportion) << ','
        << p.active_flags << '\n';
}

inline void write_trajectory_csv(const std::filesystem::path& path, std::span<const TrajectoryPoint> points) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trajectory_csv(out, points);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace uavgame

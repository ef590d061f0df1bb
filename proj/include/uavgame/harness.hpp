#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "uavgame/learning.hpp"
#include "uavgame/metrics.hpp"
#include "uavgame/oracle.hpp"
#include "uavgame/scenarios.hpp"
#include "uavgame/spec_io.hpp"

namespace uavgame {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitRuntime = 3,
  kExitVerification = 4,
};

struct RunSummary {
  double tail_mean_utility = 0.0;
  FluctuationStats fluctuation;
  double tail_mean_coverage = 0.0;
  std::optional<std::uint64_t> convergence;
};

inline RunSummary summarize(std::span<const TrajectoryPoint> trajectory, const AnalysisParams& a) {
  const auto u = utility_series(trajectory);
  std::vector<double> coverage;
  coverage.reserve(trajectory.size());
  for (const auto& p : trajectory) coverage.push_back(p.coverage_proportion);
  RunSummary s;
  s.tail_mean_utility = tail_mean(u, a.tail_fraction);
  s.fluctuation = fluctuation_stats(u, tail_length(u.size(), a.tail_fraction));
  s.tail_mean_coverage = tail_mean(coverage, a.tail_fraction);
  s.convergence =
      convergence_iteration(trajectory, a.convergence_fraction, a.convergence_window, a.tail_fraction);
  return s;
}

/// Validates, deploys with the spec's seed and runs. Throws ValidationError.
inline RunRecord execute(const ExperimentSpec& spec) {
  validate_spec(spec).throw_if_failed();
  auto [profile, channels] = init_deployment(spec.game, spec.params.seed);
  const Game game(spec.game, std::move(channels));
  return run_learning(spec.algorithm, game, std::move(profile), spec.params, spec.schedule,
                      spec.record_stride);
}

inline std::filesystem::path spec_echo_path(const std::filesystem::path& csv) {
  return csv.string() + ".spec.cfg";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline void print_delta(std::ostream& out, const DeltaBound& d) {
  static constexpr const char* names[] = {"energy", "own_power", "interference",
                                          "coverage_tradeoff", "overlap", "turbulent_coverage"};
  out << "delta bound:\n";
  for (std::size_t k = 0; k < d.terms.size(); ++k)
    out << "  " << names[k] << " = " << format_double(d.terms[k]) << "\n";
  out << "  total = " << format_double(d.total) << "\n"
      << "  minimum m = " << format_double(d.minimum_m) << "\n";
}

/// `run`: one seeded run, its trajectory CSV and a spec echo next to it.
inline int cmd_run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  if (auto report = validate_spec(spec); !report.ok()) {
    err << "invalid spec:\n";
    for (const auto& f : report.failures) err << "  - " << f << "\n";
    return kExitValidation;
  }
  try {
    const RunRecord rec = execute(spec);
    write_trajectory_csv(spec.output_path, rec.trajectory);
    write_text(spec_echo_path(spec.output_path), write_spec(spec));

    const RunSummary s = summarize(rec.trajectory, spec.analysis);
    const TrajectoryPoint& last = rec.trajectory.back();
    out << "algorithm = " << to_string(spec.algorithm) << ", tau = " << format_double(spec.params.tau);
    if (spec.algorithm == Algorithm::spblla)
      out << ", m = " << format_double(spec.params.m)
          << ", omega = " << format_double(altering_probability(spec.params.tau, spec.params.m));
    out << ", iterations = " << spec.params.max_iterations << ", seed = " << spec.params.seed << "\n";
    print_delta(out, rec.delta);
    out << "final global_utility = " << format_double(last.global_utility) << "\n"
        << "final potential = " << format_double(last.potential) << "\n"
        << "final avg_snr = " << format_double(last.average_snr) << "\n"
        << "final coverage_proportion = " << format_double(last.coverage_proportion) << "\n"
        << "tail mean global_utility = " << format_double(s.tail_mean_utility) << "\n"
        << "tail max_abs_deviation = " << format_double(s.fluctuation.max_abs_deviation) << "\n"
        << "convergence iteration = "
        << (s.convergence ? std::to_string(*s.convergence) : std::string("none")) << "\n"
        << "rng draws = " << rec.rng_draws << "\n"
        << "wall seconds = " << format_double(rec.wall_seconds) << "\n"
        << "wrote " << spec.output_path << "\n";
    return kExitOk;
  } catch (const ValidationError& e) {
    err << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

struct SweepJob {
  std::size_t value_index = 0;
  double value = 0.0;
  std::uint64_t seed = 0;
  ExperimentSpec spec;
};

struct SweepRow {
  SweepJob job;
  RunSummary summary;
  std::uint64_t rng_draws = 0;
  double wall_seconds = 0.0;
  std::string error;
};

/// Values x seeds, value-major. Seeds are base + k; each job writes its own CSV.
inline std::vector<SweepJob> plan_sweep(const ExperimentSpec& base, const std::filesystem::path& run_dir) {
  std::vector<SweepJob> jobs;
  for (std::size_t v = 0; v < base.sweep.values.size(); ++v) {
    for (std::uint64_t k = 0; k < base.sweep.seeds; ++k) {
      SweepJob job{v, base.sweep.values[v], base.params.seed + k, base};
      ExperimentSpec& s = job.spec;
      s.params.seed = job.seed;
      switch (base.sweep.axis) {
        case SweepAxis::tau:
          s.params.tau = job.value;
          break;
        case SweepAxis::m:
          s.params.m = job.value;
          s.m_factor = 0.0;
          break;
        case SweepAxis::uav_count:
          s.game.uav_count = static_cast<std::size_t>(job.value);
          if (s.m_factor > 0.0 && validate_config(s.game).ok())
            s.params.m = s.m_factor * delta_bound(s.game).minimum_m;
          break;
        case SweepAxis::none:
          break;
      }
      s.output_path = (run_dir / ("run_v" + std::to_string(v) + "_s" + std::to_string(job.seed) + ".csv")).string();
      s.sweep = SweepParams{};
      jobs.push_back(std::move(job));
    }
  }
  return jobs;
}

/// Runs every job on `threads` workers. Rows come back in job order whatever
/// the scheduling; after the first failure, jobs not yet started are skipped.
inline std::vector<SweepRow> run_sweep(const std::vector<SweepJob>& jobs, std::size_t threads) {
  std::vector<SweepRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  const auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
      SweepRow& row = rows[k];
      row.job = jobs[k];
      if (failed) {
        row.error = "skipped after an earlier failure";
        continue;
      }
      try {
        const RunRecord rec = execute(jobs[k].spec);
        write_trajectory_csv(jobs[k].spec.output_path, rec.trajectory);
        row.summary = summarize(rec.trajectory, jobs[k].spec.analysis);
        row.rng_draws = rec.rng_draws;
        row.wall_seconds = rec.wall_seconds;
      } catch (const std::exception& e) {
        row.error = e.what();
        failed = true;
      }
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(jobs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

inline constexpr std::string_view kSweepHeader =
    "axis,value,seed,tail_mean_utility,fluctuation_mean,max_abs_deviation,std_deviation,"
    "tail_mean_coverage,convergence_iteration,rng_draws,trajectory_csv";

inline void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(axis) << ',' << format_double(r.job.value) << ',' << r.job.seed << ','
        << format_double(r.summary.tail_mean_utility) << ',' << format_double(r.summary.fluctuation.mean)
        << ',' << format_double(r.summary.fluctuation.max_abs_deviation) << ','
        << format_double(r.summary.fluctuation.std_deviation) << ','
        << format_double(r.summary.tail_mean_coverage) << ',';
    if (r.summary.convergence) out << *r.summary.convergence;
    out << ',' << r.rng_draws << ',' << std::filesystem::path(r.job.spec.output_path).filename().string()
        << '\n';
  }
}

/// Directory holding a sweep's per-run CSVs: `<summary stem>_runs` beside the summary.
inline std::filesystem::path sweep_run_dir(const std::filesystem::path& summary) {
  return summary.parent_path() / (summary.stem().string() + "_runs");
}

/// `sweep`: every (value, seed) run plus a summary CSV.
inline int cmd_sweep(const ExperimentSpec& base, const std::filesystem::path& summary_path,
                     std::size_t threads, std::ostream& out, std::ostream& err) {
  if (base.sweep.axis == SweepAxis::none || base.sweep.values.empty()) {
    err << "sweep needs an axis and at least one value\n";
    return kExitValidation;
  }
  const auto jobs = plan_sweep(base, sweep_run_dir(summary_path));
  bool invalid = false;
  for (const auto& job : jobs) {
    if (auto report = validate_spec(job.spec); !report.ok()) {
      invalid = true;
      err << "run " << to_string(base.sweep.axis) << "=" << format_double(job.value) << " seed "
          << job.seed << " is invalid:\n";
      for (const auto& f : report.failures) err << "  - " << f << "\n";
    }
  }
  if (invalid) return kExitValidation;

  std::vector<SweepRow> rows;
  try {
    rows = run_sweep(jobs, threads);
  } catch (const std::exception& e) {
    err << "sweep failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  bool any_error = false;
  for (const auto& r : rows) {
    if (r.error.empty()) continue;
    any_error = true;
    err << "run " << to_string(base.sweep.axis) << "=" << format_double(r.job.value) << " seed "
        << r.job.seed << ": " << r.error << "\n";
  }
  if (any_error) return kExitRuntime;

  try {
    if (summary_path.has_parent_path()) std::filesystem::create_directories(summary_path.parent_path());
    std::ofstream csv(summary_path, std::ios::binary | std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot open " + summary_path.string() + " for writing");
    write_sweep_csv(csv, base.sweep.axis, rows);
    write_text(spec_echo_path(summary_path), write_spec(base));
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitRuntime;
  }
  double wall = 0.0;
  for (const auto& r : rows) wall += r.wall_seconds;
  out << "ran " << rows.size() << " runs (" << base.sweep.values.size() << " values x "
      << base.sweep.seeds << " seeds) on " << threads << " threads, " << format_double(wall)
      << " run-seconds\nwrote " << summary_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

enum class VerifyScale { tiny, small };

struct VerifyOptions {
  VerifyScale scale = VerifyScale::tiny;
  PotentialVariant potential = PotentialVariant::exact;
};

struct CheckResult {
  std::string config;
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline bool same_set(std::vector<ProfileId> a, std::vector<ProfileId> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

inline bool contains_all(const std::vector<ProfileId>& outer, const std::vector<ProfileId>& inner) {
  return std::all_of(inner.begin(), inner.end(), [&](ProfileId id) {
    return std::find(outer.begin(), outer.end(), id) != outer.end();
  });
}

}  // namespace detail

inline constexpr double kIdentityTolerance = 1e-12;
inline constexpr double kClosedFormTolerance = 1e-9;
inline constexpr double kOccupancyThreshold = 0.90;

/// Exhaustive checks on one small config, deployed with seed 1.
inline std::vector<CheckResult> verify_config(const std::string& name, const GameConfig& config,
                                              PotentialVariant variant) {
  using detail::sci;
  std::vector<CheckResult> out;
  auto [profile, channels] = init_deployment(config, 1);
  const Game game(config, std::move(channels));
  const ProfileSpace space(game, channel_assignment(profile));

  const PotentialCheck pc = exact_potential_check(space);
  if (variant == PotentialVariant::exact) {
    out.push_back({name, "potential_identity", pc.exact_rel <= kIdentityTolerance,
                   "exact variant, " + std::to_string(pc.moves) + " moves, max rel " + sci(pc.exact_rel) +
                       " (tol " + sci(kIdentityTolerance) + ")"});
  } else {
    out.push_back({name, "potential_identity", pc.printed_rel <= kIdentityTolerance,
                   "printed variant, " + std::to_string(pc.moves) + " moves, max rel " + sci(pc.printed_rel) +
                       " (tol " + sci(kIdentityTolerance) + "); worst dphi - dU = " +
                       sci(pc.worst_printed_discrepancy) + ", closed form predicts " +
                       sci(pc.worst_printed_predicted)});
  }
  out.push_back({name, "printed_potential_discrepancy_formula", pc.closed_form_rel <= kClosedFormTolerance,
                 "max rel " + sci(pc.closed_form_rel) + " (tol " + sci(kClosedFormTolerance) +
                     "), largest |dphi_printed - dU| " + sci(pc.printed_abs)});

  const PsneReport psne = brute_force_psne(space);
  const MaximizerSet max = phi_maximizers(space);
  out.push_back({name, "psne_nonempty", !psne.full.empty(),
                 std::to_string(psne.full.size()) + " PSNE, " + std::to_string(psne.local.size()) +
                     " constrained-move PSNE over " + std::to_string(space.size()) + " profiles"});
  out.push_back({name, "maximizers_in_psne", detail::contains_all(psne.full, max.profiles),
                 std::to_string(max.profiles.size()) + " maximizer(s), phi max = " + format_double(max.value)});

  const DeltaBound bound = delta_bound(config);
  const double mud = max_unilateral_delta(space);
  out.push_back({name, "delta_bound_sound", bound.total >= mud,
                 "bound " + format_double(bound.total) + " >= max unilateral delta " + format_double(mud)});

  if (config.uav_count == 1) {
    // One player: PSNE, potential maximizers and the global argmax coincide.
    std::vector<ProfileId> argmax;
    double best = -std::numeric_limits<double>::infinity();
    for (auto it = space.begin(); it != space.end(); ++it) best = std::max(best, global_utility(game, *it));
    for (auto it = space.begin(); it != space.end(); ++it)
      if (global_utility(game, *it) >= best - kMaximizerTieTolerance) argmax.push_back(it.id());
    const bool ok = detail::same_set(psne.full, max.profiles) && detail::same_set(max.profiles, argmax);
    out.push_back({name, "single_player_coincidence", ok,
                   std::to_string(argmax.size()) + " global argmax profile(s)"});
  }
  return out;
}

/// Occupancy checks on tiny2.
inline std::vector<CheckResult> verify_occupancy(VerifyScale scale) {
  using detail::sci;
  std::vector<CheckResult> out;
  const GameConfig config = scenarios::tiny2();
  const std::uint64_t seeds = scale == VerifyScale::small ? 5 : 1;
  const double tau = 0.005;
  const double m = 3.2;

  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    LearnerParams p;
    p.tau = tau;
    p.seed = seed;
    const OccupancyReport occ = empirical_occupancy(config, Algorithm::pblla, p, 100'000, 1'000'000);
    out.push_back({"tiny2", "pblla_occupancy_seed" + std::to_string(seed),
                   occ.maximizer_mass >= kOccupancyThreshold,
                   "mass on phi maximizer " + sci(occ.maximizer_mass) + " (>= 0.9), tau 0.005, 1e6 samples"});
  }

  auto [profile, channels] = init_deployment(config, 1);
  const Game game(config, std::move(channels));
  const ProfileSpace space(game, channel_assignment(profile));
  const StationaryReport st = exact_stationary(space, Algorithm::spblla, tau, m);
  out.push_back({"tiny2", "spblla_exact_stationary", st.maximizer_mass >= kOccupancyThreshold,
                 "stationary mass on phi maximizer " + sci(st.maximizer_mass) + " over " +
                     std::to_string(st.states.size()) + " augmented states, tau 0.005, m 3.2, omega " +
                     sci(altering_probability(tau, m))});

  double previous = -1.0;
  bool increasing = true;
  std::string masses;
  for (double t : {0.05, 0.02, 0.005}) {
    const double mass = exact_stationary(space, Algorithm::pblla, t).maximizer_mass;
    increasing = increasing && mass > previous;
    previous = mass;
    masses += (masses.empty() ? "" : ", ") + sci(mass);
  }
  out.push_back({"tiny2", "concentration_monotone_in_inverse_tau", increasing,
                 "exact pblla mass at tau 0.05, 0.02, 0.005: " + masses});
  return out;
}

inline std::vector<std::pair<std::string, GameConfig>> verify_configs(VerifyScale scale) {
  std::vector<std::pair<std::string, GameConfig>> out = {
      {"tiny2", scenarios::tiny2()},
      {"coupled_tiny", scenarios::coupled_tiny()},
      {"single_uav", scenarios::single_uav()},
      {"errata", scenarios::errata()},
  };
  if (scale == VerifyScale::small) out.emplace_back("coupled_three", scenarios::coupled_three());
  return out;
}

/// `verify`: the oracle suite with one PASS/FAIL line per named invariant.
inline int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err) {
  std::vector<CheckResult> results;
  try {
    for (const auto& [name, config] : verify_configs(options.scale)) {
      auto r = verify_config(name, config, options.potential);
      results.insert(results.end(), r.begin(), r.end());
    }
    auto occ = verify_occupancy(options.scale);
    results.insert(results.end(), occ.begin(), occ.end());
  } catch (const std::exception& e) {
    err << "verification aborted: " << e.what() << "\n";
    return kExitRuntime;
  }
  std::size_t failed = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.config << " " << r.name << ": " << r.detail << "\n";
    if (!r.passed) ++failed;
  }
  out << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed == 0 ? kExitOk : kExitVerification;
}

}  // namespace uavgame

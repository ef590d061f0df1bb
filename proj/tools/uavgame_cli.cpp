#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "uavgame/harness.hpp"
#include "uavgame/spec_io.hpp"

#ifndef UAVGAME_VERSION
#define UAVGAME_VERSION "dev"
#endif

namespace {

using namespace uavgame;

std::optional<ExperimentSpec> load_or_report(const std::string& path) {
  try {
    return load_spec(path);
  } catch (const SpecParseError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-UAV power/altitude game: log-linear learning runs, sweeps and oracle checks"};
  app.set_version_flag("--version", std::string("uavgame ") + UAVGAME_VERSION);
  app.require_subcommand(1);

  std::string run_spec;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_out;
  auto* run = app.add_subcommand("run", "Run one seeded experiment and write its trajectory CSV");
  run->add_option("spec", run_spec, "Experiment spec file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_seed, "Override learner.seed");
  run->add_option("--out", run_out, "Override output.path");

  std::string sweep_spec;
  std::optional<std::string> sweep_axis;
  std::vector<double> sweep_values;
  std::optional<std::uint64_t> sweep_seeds;
  std::optional<std::string> sweep_out;
  std::size_t sweep_threads = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "Run values x seeds and write a summary CSV");
  sweep->add_option("spec", sweep_spec, "Base experiment spec file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", sweep_axis, "Swept parameter")->check(CLI::IsMember({"tau", "m", "uav_count"}));
  sweep->add_option("--values", sweep_values, "Comma-separated axis values")->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "Seeds per value (base seed + k)")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "Summary CSV path (default: <output.path stem>_sweep.csv)");
  sweep->add_option("--threads", sweep_threads, "Concurrent runs")->check(CLI::PositiveNumber);

  std::string verify_scale = "tiny";
  std::string verify_potential = "exact";
  auto* verify = app.add_subcommand("verify", "Run the exhaustive oracle suite on small configurations");
  verify->add_option("--scale", verify_scale, "Config set")->check(CLI::IsMember({"tiny", "small"}));
  verify->add_option("--potential", verify_potential, "Potential checked against utility changes")
      ->check(CLI::IsMember({"exact", "printed"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (*run) {
    auto spec = load_or_report(run_spec);
    if (!spec) return kExitValidation;
    if (run_seed) spec->params.seed = *run_seed;
    if (run_out) spec->output_path = *run_out;
    return cmd_run(*spec, std::cout, std::cerr);
  }

  if (*sweep) {
    auto spec = load_or_report(sweep_spec);
    if (!spec) return kExitValidation;
    if (sweep_axis) spec->sweep.axis = parse_axis(*sweep_axis);
    if (!sweep_values.empty()) spec->sweep.values = sweep_values;
    if (sweep_seeds) spec->sweep.seeds = *sweep_seeds;
    std::filesystem::path summary;
    if (sweep_out) {
      summary = *sweep_out;
    } else {
      const std::filesystem::path base(spec->output_path);
      summary = base.parent_path() / (base.stem().string() + "_sweep.csv");
    }
    return cmd_sweep(*spec, summary, sweep_threads, std::cout, std::cerr);
  }

  VerifyOptions options;
  options.scale = verify_scale == "small" ? VerifyScale::small : VerifyScale::tiny;
  options.potential = verify_potential == "printed" ? PotentialVariant::printed : PotentialVariant::exact;
  return cmd_verify(options, std::cout, std::cerr);
}

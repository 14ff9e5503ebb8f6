// Command-line front end: correlation bounds, invariant ellipsoids, reachable
// tubes and seeded Monte Carlo violation studies for linear systems driven by
// time-correlated disturbances.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "corrsets/errors.hpp"
#include "corrsets/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

struct Options {
  std::string config_path;
  std::string preset_name;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 1;
  bool conservative = false;
  bool chebyshev = false;
};

void add_common(CLI::App* cmd, Options& opt) {
  auto* cfg = cmd->add_option("--config", opt.config_path, "experiment config (JSON)");
  auto* pre = cmd->add_option("--preset", opt.preset_name,
                              "built-in case study: example1 | example2");
  cfg->excludes(pre);
  cmd->add_option("--seed", opt.seed, "override the experiment seed")
      ->each([&opt](const std::string&) { opt.seed_given = true; });
  cmd->add_option("--out-dir", opt.out_dir, "output directory (default: .)");
  cmd->add_option("--jobs", opt.jobs, "worker threads for Monte Carlo stages")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--conservative", opt.conservative,
                "use the exact Minkowski-difference level (1-sqrt(lambda))^2");
  cmd->add_flag("--chebyshev", opt.chebyshev,
                "use Chebyshev levels instead of Gaussian quantiles");
}

corrsets::ExperimentConfig make_config(const Options& opt) {
  corrsets::ExperimentConfig cfg;
  if (!opt.preset_name.empty()) {
    cfg = corrsets::preset(opt.preset_name);
  } else if (!opt.config_path.empty()) {
    cfg = corrsets::load_config_file(opt.config_path);
  } else {
    throw corrsets::ConfigError("either --preset or --config is required");
  }
  if (opt.seed_given) cfg.seed = opt.seed;
  if (cfg.generator) cfg.generator->seed = cfg.seed;
  if (opt.conservative) cfg.conservative = true;
  if (opt.chebyshev) cfg.distribution = corrsets::LevelDistribution::chebyshev;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const Options& opt, const std::string& name) {
  std::filesystem::create_directories(opt.out_dir);
  const auto path = std::filesystem::path(opt.out_dir) / name;
  std::ofstream os(path);
  if (!os) throw corrsets::ConfigError("cannot write " + path.string());
  return os;
}

int run(const std::string& command, const Options& opt) {
  const corrsets::ExperimentConfig cfg = make_config(opt);
  const std::uint64_t hash = corrsets::config_hash(cfg);

  if (command == "simulate") {
    const corrsets::ViolationReport report = corrsets::run_violation_study(cfg, opt.jobs);
    auto csv = open_out(opt, "violations.csv");
    corrsets::write_violation_csv(report, csv);
    auto js = open_out(opt, "study.json");
    corrsets::write_study_json(report, cfg, js);
    std::cout << "simulate: " << report.levels.size() << " levels x " << report.trajectories
              << " trajectories x " << report.horizon << " steps -> " << opt.out_dir
              << "/violations.csv\n";
    return kExitOk;
  }

  const corrsets::PipelineResult result = corrsets::run_pipeline(cfg, opt.jobs);
  if (command == "bound") {
    auto os = open_out(opt, "bound.json");
    corrsets::write_bound_json(result.bound, hash, os);
    std::cout << "bound: route " << corrsets::to_string(result.bound.route)
              << ", trace " << result.bound.gw.trace() << " -> " << opt.out_dir
              << "/bound.json\n";
  } else if (command == "invariant") {
    auto os = open_out(opt, "invariant.json");
    corrsets::write_invariant_json(result.invariant, result.rho_table, hash, os);
    auto cs = open_out(opt, "rho_table.csv");
    corrsets::write_rho_table_csv(result.invariant, result.rho_table, cs);
    std::cout << "invariant: lambda " << result.invariant.lambda << " -> " << opt.out_dir
              << "/invariant.json\n";
  } else if (command == "reach") {
    auto os = open_out(opt, "tube.csv");
    corrsets::write_tube_csv(result.tube, os);
    std::cout << "reach: " << result.tube.levels.size() << " steps at r " << result.tube.r
              << " -> " << opt.out_dir << "/tube.csv\n";
  } else {  // pipeline
    auto bj = open_out(opt, "bound.json");
    corrsets::write_bound_json(result.bound, hash, bj);
    auto ij = open_out(opt, "invariant.json");
    corrsets::write_invariant_json(result.invariant, result.rho_table, hash, ij);
    auto rc = open_out(opt, "rho_table.csv");
    corrsets::write_rho_table_csv(result.invariant, result.rho_table, rc);
    auto tc = open_out(opt, "tube.csv");
    corrsets::write_tube_csv(result.tube, tc);
    auto pj = open_out(opt, "pipeline.json");
    corrsets::write_pipeline_json(result, cfg, pj);
    std::cout << "pipeline: bound.json, invariant.json, tube.csv, pipeline.json -> "
              << opt.out_dir << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) try {
  CLI::App app{"probabilistic reachable/invariant sets under correlated disturbances"};
  app.require_subcommand(1);

  Options opt;
  const char* names[] = {"bound", "invariant", "reach", "simulate", "pipeline"};
  const char* descs[] = {
      "compute the correlation bound",
      "synthesize the probabilistic invariant ellipsoid and level table",
      "compute the reachable covariance tube",
      "run the Monte Carlo violation study",
      "run bound -> invariant -> levels -> tube and write all artifacts",
  };
  for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(names[i], descs[i]), opt);

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const corrsets::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const corrsets::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const corrsets::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
} catch (const std::exception& e) {
  std::cerr << "internal error: " << e.what() << "\n";
  return kExitNumerical;
}

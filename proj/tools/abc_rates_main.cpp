#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "abcrates/experiments.hpp"
#include "abcrates/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::int64_t seed = -1;
  int workers = 0;
  std::string out_dir;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "Path to the experiment config JSON")
      ->required();
  sub->add_option("--seed", args.seed, "Override the config seed");
  sub->add_option("--workers", args.workers, "Override the config worker count");
  sub->add_option("--out", args.out_dir, "Override the config output directory");
}

int run(const std::string& expected_experiment, const CommonArgs& args) {
  nlohmann::json j;
  {
    std::ifstream in(args.config_path);
    if (!in) {
      std::cerr << "error: cannot open config file " << args.config_path << "\n";
      return abcr::kExitConfig;
    }
    try {
      in >> j;
    } catch (const std::exception& e) {
      std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
      return abcr::kExitConfig;
    }
  }
  if (args.seed >= 0) j["seed"] = args.seed;
  if (args.workers > 0) j["workers"] = args.workers;
  if (!args.out_dir.empty()) j["out"] = args.out_dir;

  try {
    abcr::ExperimentConfig cfg = abcr::ExperimentConfig::parse(j);
    if (cfg.experiment != expected_experiment) {
      std::cerr << "error: config declares experiment '" << cfg.experiment
                << "' but subcommand is '" << expected_experiment << "'\n";
      return abcr::kExitConfig;
    }
    const abcr::ExperimentResult res = abcr::run_experiment(cfg);
    std::cerr << expected_experiment << ": done in "
              << res.summary["runtime_seconds"].get<double>() << " s, summary in "
              << cfg.out_dir << "/summary.json\n";
    return res.exit_code;
  } catch (const abcr::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return abcr::kExitConfig;
  } catch (const abcr::DegenerateError& e) {
    std::cerr << "degenerate outcome: " << e.what() << "\n";
    return abcr::kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rejection ABC with heterogeneous-rate summaries: experiment runner"};
  app.set_version_flag("--version", std::string(abcr::kVersion));
  app.require_subcommand(1);

  CommonArgs shape_args, risk_args, scaling_args, oracle_args;
  add_common(app.add_subcommand("shape", "Empirical vs theoretical posterior shape"),
             shape_args);
  add_common(app.add_subcommand("risk", "Posterior risk vs tolerance, vanilla and adjusted"),
             risk_args);
  add_common(app.add_subcommand("acceptance-scaling",
                                "Acceptance rate scaling in n with eps = C/sqrt(n)"),
             scaling_args);
  add_common(app.add_subcommand("oracle-check",
                                "Rejection ABC vs the brute-force grid posterior"),
             oracle_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return abcr::kExitConfig;
  }

  if (app.got_subcommand("shape")) return run("shape", shape_args);
  if (app.got_subcommand("risk")) return run("risk", risk_args);
  if (app.got_subcommand("acceptance-scaling")) return run("acceptance-scaling", scaling_args);
  return run("oracle-check", oracle_args);
}

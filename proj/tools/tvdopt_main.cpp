// Command-line experiment runner: run, grid, rates, validate, explore-m.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "tvdopt/config.hpp"
#include "tvdopt/errors.hpp"
#include "tvdopt/experiment.hpp"

namespace {

using namespace tvdopt;

struct GridArgs {
  double rho_min = 0.05;
  double rho_max = 0.95;
  double sigma_min = 0.05;
  double sigma_max = 0.95;
  std::size_t resolution = 100;
  std::string output;
};

void add_grid_options(CLI::App* cmd, GridArgs& args) {
  cmd->add_option("--rho-min", args.rho_min, "Smallest contraction factor")->capture_default_str();
  cmd->add_option("--rho-max", args.rho_max, "Largest contraction factor")->capture_default_str();
  cmd->add_option("--sigma-min", args.sigma_min, "Smallest spectral gap")->capture_default_str();
  cmd->add_option("--sigma-max", args.sigma_max, "Largest spectral gap")->capture_default_str();
  cmd->add_option("--resolution", args.resolution, "Points per axis")->capture_default_str();
  cmd->add_option("-o,--output", args.output, "CSV path (default: stdout)");
}

// Writes to `path`, or stdout when empty.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  fn(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized gradient method with multiple gossip rounds per gradient"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode;
  std::string output;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run an experiment and write the error trace as CSV");
  run->add_option("config", config_path, "Experiment config (INI)")->required();
  run->add_option("--mode", mode, "Execution path")->check(CLI::IsMember({"vectorized", "netsim"}));
  run->add_option("-o,--output", output, "CSV path (overrides run.output; default stdout)");
  run->add_option("--iterations", iterations, "Override run.iterations");
  run->add_option("--seed", seed, "Override run.seed");

  GridArgs grid_args;
  auto* grid = app.add_subcommand("grid", "Communication rounds m over a (rho, sigma) grid");
  add_grid_options(grid, grid_args);

  GridArgs rate_args;
  rate_args.resolution = 50;
  auto* rates = app.add_subcommand("rates", "Per-step convergence rate rho^(1/m) over a grid");
  add_grid_options(rates, rate_args);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config against the assumptions");
  validate->add_option("config", validate_path, "Experiment config (INI)")->required();

  double explore_rho = 0.5;
  double explore_sigma = 0.5;
  std::size_t explore_resolution = 20;
  std::string explore_output;
  auto* explore = app.add_subcommand(
      "explore-m", "Evaluate ceil(log_s(sigma0(r))) for r >= rho, s >= sigma");
  explore->add_option("--rho", explore_rho, "Contraction factor")->required();
  explore->add_option("--sigma", explore_sigma, "Spectral gap")->required();
  explore->add_option("--resolution", explore_resolution, "Points per axis")->capture_default_str();
  explore->add_option("-o,--output", explore_output, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (*run) {
      RunConfig cfg = load_config(config_path);
      if (mode == "netsim") cfg.mode = ExecutionMode::netsim;
      if (mode == "vectorized") cfg.mode = ExecutionMode::vectorized;
      if (iterations) cfg.iterations = *iterations;
      if (seed) cfg.seed = *seed;
      if (!output.empty()) cfg.output = output;

      RunSummary summary;
      if (cfg.output) {
        std::ofstream csv(*cfg.output);
        if (!csv) throw ConfigError("cannot write '" + cfg.output->string() + "'");
        summary = cmd_run(cfg, csv);
        std::ofstream meta(cfg.output->string() + ".json");
        meta << summary_json(summary) << '\n';
      } else {
        summary = cmd_run(cfg, std::cout);
      }
      std::cerr << "m=" << summary.params.m << (summary.params.m_overridden ? " (override)" : "")
                << " alpha=" << format_number(summary.params.alpha)
                << " rho=" << format_number(summary.params.rho)
                << " sigma=" << format_number(summary.params.sigma)
                << " gradients=" << summary.counters.gradient_evaluations
                << " row_communications=" << summary.counters.row_communications
                << " final_error=" << format_number(summary.final_max_error) << '\n';
      return kExitSuccess;
    }
    if (*grid) {
      with_output(grid_args.output, [&](std::ostream& out) {
        cmd_grid({grid_args.rho_min, grid_args.rho_max}, {grid_args.sigma_min, grid_args.sigma_max},
                 grid_args.resolution, out);
      });
      return kExitSuccess;
    }
    if (*rates) {
      with_output(rate_args.output, [&](std::ostream& out) {
        cmd_rates({rate_args.rho_min, rate_args.rho_max}, {rate_args.sigma_min, rate_args.sigma_max},
                  rate_args.resolution, out);
      });
      return kExitSuccess;
    }
    if (*validate) {
      const auto outcome = cmd_validate(load_config(validate_path));
      print_validation(outcome, std::cout);
      return outcome.passed() ? kExitSuccess : kExitValidationFailure;
    }
    if (*explore) {
      with_output(explore_output, [&](std::ostream& out) {
        cmd_explore_m(explore_rho, explore_sigma, explore_resolution, out);
      });
      return kExitSuccess;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
  return kExitSuccess;
}

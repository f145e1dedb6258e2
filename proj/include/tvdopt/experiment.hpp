#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tvdopt/algorithm.hpp"
#include "tvdopt/config.hpp"

namespace tvdopt {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitSuccess = 0,
  kExitValidationFailure = 1,
  kExitConfigError = 2,
  kExitNumericalFailure = 3,
};

struct RunSummary {
  AlgorithmParams params;
  Counters counters;
  std::size_t iterations = 0;
  std::size_t agents = 0;
  double final_max_error = 0.0;
  double centralized_final_error = 0.0;
  std::optional<double> fitted_rate;
  std::optional<double> centralized_fitted_rate;
  std::string mode;
  std::string isa;
};

/// Executes the configured run plus centralized gradient descent from the
/// mean initial point and writes the CSV trace
/// `iter,step,agent,error,lyapunov` (agent rows first, then `centralized`).
RunSummary cmd_run(const RunConfig& config, std::ostream& csv);

/// Run metadata as a JSON object (for the sidecar file).
std::string summary_json(const RunSummary& summary);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Evenly spaced points lo..hi inclusive; needs resolution >= 2 and a range
/// inside (0, 1).
std::vector<double> grid_points(Range range, std::size_t resolution);

/// CSV `rho,sigma,m` over the grid, rows ordered by rho then sigma.
void cmd_grid(Range rho, Range sigma, std::size_t resolution, std::ostream& csv);

/// CSV `rho,sigma,m,per_step_rate` with per_step_rate = rho^(1/m).
void cmd_rates(Range rho, Range sigma, std::size_t resolution, std::ostream& csv);

/// CSV `r,s,m` evaluating ceil(log_s(sigma0(r))) on r in [rho, 1), s in
/// [sigma, 1).
void cmd_explore_m(double rho, double sigma, std::size_t resolution, std::ostream& csv);

struct CheckResult {
  std::string name;
  enum class Status { pass, fail, warn } status = Status::pass;
  std::string detail;
};

struct ValidationOutcome {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Assumption checks for a config: double stochasticity and spectral gap of
/// every schedule matrix, the consensus bound sigma^m <= sigma0(rho),
/// sampled contraction of every local objective, and the zero gradient sum
/// at x*. Contraction on localization problems is reported as a warning
/// because the local functions are nonconvex.
ValidationOutcome cmd_validate(const RunConfig& config);

void print_validation(const ValidationOutcome& outcome, std::ostream& out);

/// Formats a double with 17 significant digits.
std::string format_number(double value);

}  // namespace tvdopt

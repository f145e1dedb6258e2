#include "tvdopt/experiment.hpp"

#include <fmt/format.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "tvdopt/analysis.hpp"
#include "tvdopt/errors.hpp"
#include "tvdopt/kernels.hpp"
#include "tvdopt/netsim.hpp"

namespace tvdopt {
namespace {

std::optional<double> try_fit(const std::vector<double>& errors) {
  try {
    return fit_rate(errors);
  } catch (const DegenerateFitError&) {
    return std::nullopt;
  }
}

void check_range(const char* name, Range r) {
  if (!(r.lo > 0.0 && r.hi < 1.0 && r.lo <= r.hi)) {
    throw ConfigError(fmt::format("{} range must satisfy 0 < lo <= hi < 1", name));
  }
}

}  // namespace

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

RunSummary cmd_run(const RunConfig& config, std::ostream& csv) {
  ResolvedRun run = resolve(config);
  const AlgorithmParams& params = run.params;
  const std::size_t iterations = config.iterations;

  RunTrace trace;
  if (config.mode == ExecutionMode::netsim) {
    trace = netsim::run_netsim(run.problem, run.schedule, params, run.initial, iterations).trace;
  } else {
    trace = run_algorithm(run.problem, run.schedule, params, run.initial, iterations);
  }

  Vector xstar;
  if (run.problem.optimizer()) {
    xstar = *run.problem.optimizer();
  } else {
    xstar = locate_optimizer(run.problem, params.alpha, run.centralized_start);
  }
  const FixedPoint fp = fixed_point(Problem(run.problem.locals(), xstar), params);

  RunSummary summary;
  summary.params = params;
  summary.counters = trace.counters;
  summary.iterations = iterations;
  summary.agents = run.problem.agents();
  summary.mode = config.mode == ExecutionMode::netsim ? "netsim" : "vectorized";
  summary.isa = std::string(kernels::isa_name(kernels::active().isa));

  csv << "iter,step,agent,error,lyapunov\n";
  std::vector<double> max_errors;
  max_errors.reserve(iterations + 1);
  for (std::size_t k = 0; k <= iterations; ++k) {
    const double v = lyapunov(trace.x[k] - fp.x, trace.y[k] - fp.y, params.lambda);
    const Vector errors = agent_errors(trace.x[k], xstar);
    double worst = 0.0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
      worst = std::max(worst, errors[i]);
      csv << k << ',' << k * params.m << ',' << i + 1 << ',' << format_number(errors[i]) << ','
          << format_number(v) << '\n';
    }
    max_errors.push_back(worst);
  }

  const auto central = centralized_gd(run.problem, params.alpha, run.centralized_start, iterations);
  std::vector<double> central_errors;
  central_errors.reserve(central.size());
  for (std::size_t k = 0; k < central.size(); ++k) {
    double e2 = 0.0;
    for (std::size_t j = 0; j < xstar.size(); ++j) {
      e2 += (central[k][j] - xstar[j]) * (central[k][j] - xstar[j]);
    }
    central_errors.push_back(std::sqrt(e2));
    csv << k << ',' << k << ",centralized," << format_number(central_errors.back()) << ",\n";
  }

  summary.final_max_error = max_errors.back();
  summary.centralized_final_error = central_errors.back();
  summary.fitted_rate = try_fit(max_errors);
  summary.centralized_fitted_rate = try_fit(central_errors);
  return summary;
}

std::string summary_json(const RunSummary& s) {
  nlohmann::json j;
  j["mode"] = s.mode;
  j["isa"] = s.isa;
  j["agents"] = s.agents;
  j["iterations"] = s.iterations;
  j["alpha"] = s.params.alpha;
  j["rho"] = s.params.rho;
  j["sigma"] = s.params.sigma;
  j["m"] = s.params.m;
  j["m_overridden"] = s.params.m_overridden;
  j["lambda"] = s.params.lambda;
  j["gradient_evaluations"] = s.counters.gradient_evaluations;
  j["row_communications"] = s.counters.row_communications;
  j["messages"] = s.counters.messages;
  j["final_max_error"] = s.final_max_error;
  j["centralized_final_error"] = s.centralized_final_error;
  j["fitted_rate"] = s.fitted_rate ? nlohmann::json(*s.fitted_rate) : nlohmann::json();
  j["centralized_fitted_rate"] =
      s.centralized_fitted_rate ? nlohmann::json(*s.centralized_fitted_rate) : nlohmann::json();
  return j.dump(2);
}

std::vector<double> grid_points(Range range, std::size_t resolution) {
  if (resolution < 2) throw ConfigError("grid resolution must be at least 2");
  std::vector<double> points(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(resolution - 1);
    points[i] = range.lo + (range.hi - range.lo) * t;
  }
  return points;
}

void cmd_grid(Range rho, Range sigma, std::size_t resolution, std::ostream& csv) {
  check_range("rho", rho);
  check_range("sigma", sigma);
  const auto rhos = grid_points(rho, resolution);
  const auto sigmas = grid_points(sigma, resolution);
  csv << "rho,sigma,m\n";
  for (double r : rhos) {
    for (double s : sigmas) csv << format_number(r) << ',' << format_number(s) << ',' << comm_rounds(r, s) << '\n';
  }
}

void cmd_rates(Range rho, Range sigma, std::size_t resolution, std::ostream& csv) {
  check_range("rho", rho);
  check_range("sigma", sigma);
  const auto rhos = grid_points(rho, resolution);
  const auto sigmas = grid_points(sigma, resolution);
  csv << "rho,sigma,m,per_step_rate\n";
  for (double r : rhos) {
    for (double s : sigmas) {
      const std::size_t m = comm_rounds(r, s);
      csv << format_number(r) << ',' << format_number(s) << ',' << m << ','
          << format_number(std::pow(r, 1.0 / static_cast<double>(m))) << '\n';
    }
  }
}

void cmd_explore_m(double rho, double sigma, std::size_t resolution, std::ostream& csv) {
  if (!(rho > 0.0 && rho < 1.0) || !(sigma > 0.0 && sigma < 1.0)) {
    throw ConfigError("explore-m needs rho and sigma in (0, 1)");
  }
  if (resolution < 2) throw ConfigError("grid resolution must be at least 2");
  csv << "r,s,m\n";
  for (std::size_t a = 0; a < resolution; ++a) {
    const double r = rho + (1.0 - rho) * static_cast<double>(a) / static_cast<double>(resolution);
    for (std::size_t b = 0; b < resolution; ++b) {
      const double s =
          sigma + (1.0 - sigma) * static_cast<double>(b) / static_cast<double>(resolution);
      csv << format_number(r) << ',' << format_number(s) << ','
          << format_number(comm_rounds_expression(r, s)) << '\n';
    }
  }
}

bool ValidationOutcome::passed() const {
  for (const auto& c : checks) {
    if (c.status == CheckResult::Status::fail) return false;
  }
  return true;
}

ValidationOutcome cmd_validate(const RunConfig& config) {
  using Status = CheckResult::Status;
  ValidationOutcome out;
  const Problem problem = build_problem(config);
  const auto matrices = schedule_matrices(config);

  double max_gap = 0.0;
  for (std::size_t idx = 0; idx < matrices.size(); ++idx) {
    const auto& w = matrices[idx];
    const auto report = validate_doubly_stochastic(w, config.schedule.options.tolerance,
                                                   config.schedule.options.require_nonnegative);
    out.checks.push_back({fmt::format("matrix {} doubly stochastic", idx + 1),
                          report.passed ? Status::pass : Status::fail,
                          fmt::format("max deviation {:.3g}, {} negative entries",
                                      report.max_deviation, report.negative_entries)});
    if (w.agents() != problem.agents()) {
      out.checks.push_back({fmt::format("matrix {} size", idx + 1), Status::fail,
                            fmt::format("{} agents, problem has {}", w.agents(), problem.agents())});
    }
    const double gap = spectral_gap(w);
    max_gap = std::max(max_gap, gap);
    if (config.sigma) {
      out.checks.push_back({fmt::format("matrix {} spectral gap <= sigma", idx + 1),
                            gap <= *config.sigma ? Status::pass : Status::fail,
                            fmt::format("gap {:.6f}, sigma {:.6f}", gap, *config.sigma)});
    }
  }

  if (!problem.optimizer()) {
    out.checks.push_back({"optimizer known", Status::fail, "problem has no x*"});
    return out;
  }
  const Vector& xstar = *problem.optimizer();
  const double grad_sum = problem.gradient_sum_norm_at_optimizer();
  out.checks.push_back({"local gradients sum to zero at x*",
                        grad_sum <= 1e-6 * static_cast<double>(problem.agents()) ? Status::pass
                                                                                 : Status::fail,
                        fmt::format("|sum grad f_i(x*)| = {:.3g}", grad_sum)});

  double alpha = 0.0;
  double rho = 0.0;
  if (config.problem == ProblemKind::quadratic) {
    const auto derived = params_from_one_point_convexity({config.quadratic.mu, config.quadratic.L});
    alpha = config.alpha.value_or(derived.alpha);
    rho = config.rho.value_or(derived.rho);
  } else {
    alpha = config.alpha ? *config.alpha : optimal_stepsize(problem, xstar);
    rho = config.rho ? *config.rho : target_contraction_factor(config.localization, alpha);
  }

  const double sigma = config.sigma.value_or(max_gap);
  if (sigma < 1.0 && rho < 1.0) {
    const auto params = AlgorithmParams::make(alpha, rho, sigma, config.m);
    out.checks.push_back({"consensus bound sigma^m <= sigma0(rho)",
                          params.consensus_bound_holds() ? Status::pass : Status::fail,
                          fmt::format("sigma^m = {:.6f}, sigma0 = {:.6f}, m = {}",
                                      std::pow(params.sigma, static_cast<double>(params.m)),
                                      sigma0(params.rho), params.m)});
  } else {
    out.checks.push_back({"consensus bound sigma^m <= sigma0(rho)", Status::fail,
                          fmt::format("needs rho, sigma < 1 (rho {:.6f}, sigma {:.6f})", rho, sigma)});
  }

  const auto samples = sample_ball(xstar, 10.0, 1000, config.seed);
  const Status contraction_fail =
      config.problem == ProblemKind::localization ? Status::warn : Status::fail;
  for (std::size_t i = 0; i < problem.agents(); ++i) {
    try {
      const auto report = check_contraction(problem.local(i), xstar, {alpha, rho}, samples);
      out.checks.push_back({fmt::format("agent {} contraction", i + 1),
                            report.passed ? Status::pass : contraction_fail,
                            fmt::format("worst ratio {:.6f}, rho {:.6f}", report.worst_ratio, rho)});
    } catch (const SingularPointError& e) {
      out.checks.push_back({fmt::format("agent {} contraction", i + 1), contraction_fail, e.what()});
    }
  }
  return out;
}

void print_validation(const ValidationOutcome& outcome, std::ostream& out) {
  for (const auto& c : outcome.checks) {
    const char* tag = c.status == CheckResult::Status::pass   ? "PASS"
                      : c.status == CheckResult::Status::fail ? "FAIL"
                                                              : "WARN";
    out << tag << "  " << c.name << "  (" << c.detail << ")\n";
  }
  out << (outcome.passed() ? "all checks passed\n" : "validation failed\n");
}

}  // namespace tvdopt

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "support.hpp"
#include "tvdopt/analysis.hpp"
#include "tvdopt/config.hpp"
#include "tvdopt/experiment.hpp"
#include "tvdopt/netsim.hpp"

using namespace tvdopt;
using testing::MatrixXd;

namespace {

// Pinned tolerances and budgets.
constexpr double kGapTarget = 0.7853;
constexpr double kGapTol = 1e-3;
constexpr double kStochasticTol = 1e-15;
constexpr std::size_t kBruteForceCap = 10000;
constexpr double kContractionSlack = 1e-9;
constexpr double kRateSlack = 0.02;
constexpr double kRateMatch = 0.05;
constexpr double kDeltaVTol = 1e-9;
constexpr double kEnvelopeSlack = 1e-6;
constexpr double kBoundSlack = 1e-9;
constexpr double kConservationTol = 1e-12;
constexpr double kTrajectoryTol = 1e-12;
constexpr double kLocalizationErrorTol = 1e-6;
constexpr double kGradientRelTol = 1e-5;
constexpr double kTraceTol = 1e-10;
// V(k) is compared with rho^{2k} V(0) only while that envelope is above the
// rounding floor of the run.
constexpr double kEnvelopeFloor = 1e-20;

struct Outcome {
  bool passed = false;
  std::string detail;
};

Outcome verdict(bool passed, std::string detail) { return {passed, std::move(detail)}; }

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

Vector block_mean(const StackedVector& z) {
  Vector mean(z.dim(), 0.0);
  for (std::size_t i = 0; i < z.agents(); ++i) {
    for (std::size_t e = 0; e < z.dim(); ++e) mean[e] += z.block(i)[e];
  }
  for (double& v : mean) v /= static_cast<double>(z.agents());
  return mean;
}

Outcome spectral_gap_criterion() {
  const auto [a, b] = reference_gossip_pair();
  const double ga = spectral_gap(a);
  const double gb = spectral_gap(b);
  const double gmax = std::max(ga, gb);
  const double oracle = std::max(testing::oracle_gap(a), testing::oracle_gap(b));
  const bool ok = std::abs(gmax - kGapTarget) <= kGapTol && std::abs(gmax - oracle) <= 1e-10;
  return verdict(ok, fmt::format("gaps {:.6f}, {:.6f}; max {:.6f} (SVD {:.6f})", ga, gb, gmax, oracle));
}

Outcome double_stochastic_criterion() {
  const auto [a, b] = reference_gossip_pair();
  const auto ra = validate_doubly_stochastic(a, kStochasticTol, true);
  const auto rb = validate_doubly_stochastic(b, kStochasticTol, true);
  return verdict(ra.passed && rb.passed,
                 fmt::format("max deviation {:.1e}, {:.1e}", ra.max_deviation, rb.max_deviation));
}

Outcome comm_rounds_criterion() {
  const std::size_t res = 100;
  std::vector<double> axis(res);
  for (std::size_t i = 0; i < res; ++i) axis[i] = 0.05 + 0.9 * static_cast<double>(i) / (res - 1);
  std::vector<std::size_t> m(res * res);
  std::size_t mismatches = 0;
  for (std::size_t r = 0; r < res; ++r) {
    for (std::size_t s = 0; s < res; ++s) {
      m[r * res + s] = comm_rounds(axis[r], axis[s]);
      if (m[r * res + s] != testing::brute_force_rounds(axis[r], axis[s], kBruteForceCap)) ++mismatches;
    }
  }
  std::size_t monotone_breaks = 0;
  for (std::size_t r = 0; r < res; ++r) {
    for (std::size_t s = 0; s < res; ++s) {
      if (r + 1 < res && m[(r + 1) * res + s] > m[r * res + s]) ++monotone_breaks;
      if (s + 1 < res && m[r * res + s + 1] < m[r * res + s]) ++monotone_breaks;
    }
  }
  return verdict(mismatches == 0 && monotone_breaks == 0,
                 fmt::format("{} brute-force mismatches, {} monotonicity breaks; m(0.75, 0.7853) = {}",
                             mismatches, monotone_breaks, comm_rounds(0.75, 0.7853)));
}

Outcome contraction_criterion() {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> mu_dist(0.05, 5.0);
  std::uniform_real_distribution<double> cond_dist(1.0, 50.0);
  double worst_excess = -1.0;
  std::size_t failures = 0;
  for (int pair = 0; pair < 50; ++pair) {
    const double mu = mu_dist(rng);
    const double L = mu * cond_dist(rng);
    const std::size_t d = 1 + static_cast<std::size_t>(pair % 10);
    const auto a = testing::random_spd(d, mu, L, rng, true);
    std::vector<double> xs(d);
    std::normal_distribution<double> normal;
    for (double& v : xs) v = normal(rng);
    // b = A x* so that x* is the minimizer
    std::vector<double> b(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) b[i] += a[i * d + j] * xs[j];
    }
    const auto f = quadratic_objective(d, a, b);
    const auto params = params_from_one_point_convexity({mu, L});
    const auto samples = sample_ball(xs, 10.0, 1000, static_cast<std::uint64_t>(pair));

    // independent ratio through the dense map I - alpha A
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> am(
        a.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const MatrixXd map = MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) -
                         params.alpha * am;
    double worst = 0.0;
    for (const auto& x : samples) {
      Eigen::VectorXd e(static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < d; ++i) e(static_cast<Eigen::Index>(i)) = x[i] - xs[i];
      if (e.norm() == 0.0) continue;
      worst = std::max(worst, (map * e).norm() / e.norm());
    }
    const auto report = check_contraction(*f, xs, params, samples);
    if (!report.passed || worst > params.rho + kContractionSlack) ++failures;
    worst_excess = std::max({worst_excess, worst - params.rho, report.worst_ratio - params.rho});
  }
  return verdict(failures == 0, fmt::format("{} of 50 pairs failed; worst ratio - rho = {:.2e}",
                                            failures, worst_excess));
}

Outcome rate_criterion() {
  const auto [first, second] = reference_gossip_pair();
  double worst_over = -1.0;
  double worst_gap = 0.0;
  std::size_t failures = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const QuadraticProblemSpec spec{5, 3, 1.0, 2.0 + 0.5 * static_cast<double>(seed), seed};
    const Problem p = make_quadratic_problem(spec);
    const auto cp = params_from_one_point_convexity({spec.mu, spec.L});
    auto schedule = seed % 2 ? GossipSchedule::random_choice({first, second}, 100 + seed)
                             : GossipSchedule::cyclic({first, second});
    const auto params = AlgorithmParams::make(cp.alpha, cp.rho, schedule.max_gap());
    std::mt19937_64 rng(seed);
    const auto x0 = testing::random_stacked(5, 3, rng, 3.0);
    const std::size_t iterations = 200;
    const auto trace = run_algorithm(p, schedule, params, initial_state(x0), iterations);
    Vector errors;
    for (const auto& x : trace.x) errors.push_back(max_agent_error(x, *p.optimizer()));

    const auto central = centralized_gd(p, cp.alpha, block_mean(x0), iterations);
    Vector central_errors;
    for (const auto& x : central) {
      double s = 0.0;
      for (std::size_t e = 0; e < 3; ++e) s += std::pow(x[e] - (*p.optimizer())[e], 2);
      central_errors.push_back(std::sqrt(s));
    }
    const double rate = fit_rate(errors);
    const double central_rate = fit_rate(central_errors);
    worst_over = std::max(worst_over, rate - cp.rho);
    worst_gap = std::max(worst_gap, std::abs(rate - central_rate));
    if (rate > cp.rho + kRateSlack || std::abs(rate - central_rate) > kRateMatch) ++failures;
  }
  return verdict(failures == 0,
                 fmt::format("{} of 10 runs failed; max(rate - rho) = {:.4f}, max |rate - centralized| = {:.4f}",
                             failures, worst_over, worst_gap));
}

Outcome lyapunov_criterion(const std::vector<testing::CorpusCase>& corpus) {
  std::size_t runs = 0;
  std::size_t delta_fail = 0, envelope_fail = 0, bound_fail = 0, term_fail = 0;
  double max_delta = -INFINITY;
  for (const auto& c : corpus) {
    if (!c.compliant) continue;
    ++runs;
    const auto trace = run_algorithm(c.problem, c.schedule, c.params, c.initial, c.iterations);
    const auto fp = fixed_point(c.problem, c.params);
    const auto report = lyapunov_trace(trace, fp, c.params, kDeltaVTol);
    max_delta = std::max(max_delta, report.max_delta);
    if (!report.violations.empty() || report.max_delta > kDeltaVTol) ++delta_fail;
    if (report.max_term > kDeltaVTol) ++term_fail;
    const double v0 = report.records.front().value;
    const double rho = c.params.rho;
    const double cbound = error_bound_constant(v0, c.params.lambda);
    for (std::size_t k = 0; k <= c.iterations; ++k) {
      const double envelope = std::pow(rho * rho, static_cast<double>(k)) * v0;
      if (envelope > kEnvelopeFloor * v0 && report.records[k].value > envelope * (1 + kEnvelopeSlack)) {
        ++envelope_fail;
      }
      const Vector errs = agent_errors(trace.x[k], *c.problem.optimizer());
      for (double e : errs) {
        if (e > cbound * std::pow(rho, static_cast<double>(k)) + kBoundSlack) ++bound_fail;
      }
    }
  }
  return verdict(delta_fail + envelope_fail + bound_fail + term_fail == 0,
                 fmt::format("{} runs; max dV = {:.2e}; failures: dV {}, terms {}, envelope {}, bound {}",
                             runs, max_delta, delta_fail, term_fail, envelope_fail, bound_fail));
}

Outcome conservation_criterion(const std::vector<testing::CorpusCase>& corpus) {
  double worst_y = 0.0, worst_v = 0.0;
  for (const auto& c : corpus) {
    const auto trace = run_algorithm(c.problem, c.schedule, c.params, c.initial, c.iterations);
    for (const auto& y : trace.y) worst_y = std::max(worst_y, max_abs(block_mean(y)));
    for (std::size_t k = 0; k < trace.v.size(); ++k) {
      const auto mv = block_mean(trace.v[k]);
      const auto mx = block_mean(trace.x[k]);
      for (std::size_t e = 0; e < mv.size(); ++e) worst_v = std::max(worst_v, std::abs(mv[e] - mx[e]));
    }
  }
  return verdict(worst_y <= kConservationTol && worst_v <= kConservationTol,
                 fmt::format("max |avg y| = {:.2e}, max |avg v - avg x| = {:.2e}", worst_y, worst_v));
}

Outcome single_agent_criterion() {
  const std::size_t d = 4;
  std::mt19937_64 rng(31);
  const auto a = testing::random_spd(d, 1.0, 6.0, rng, true);
  const std::vector<double> b{0.3, -1.0, 2.0, 0.5};
  const auto f = quadratic_objective(d, a, b);
  const Problem p({f});
  const auto cp = params_from_one_point_convexity({1.0, 6.0});
  const auto params = AlgorithmParams::make(cp.alpha, cp.rho, 0.0);
  const Vector x0{4.0, -3.0, 1.0, 2.0};
  const auto trace = run_algorithm(p, GossipSchedule::constant(GossipMatrix::identity(1)), params,
                                   initial_state(StackedVector::consensus(1, x0)), 100);
  // oracle: x <- x - alpha (A x - b) in Eigen
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> am(a.data(), 4, 4);
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), 4);
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), 4);
  double worst = 0.0;
  for (std::size_t k = 0; k <= 100; ++k) {
    for (std::size_t e = 0; e < d; ++e) {
      worst = std::max(worst, std::abs(trace.x[k].block(0)[e] - x(static_cast<Eigen::Index>(e))));
    }
    x = x - params.alpha * (am * x - bv);
  }
  return verdict(worst <= kTrajectoryTol, fmt::format("max deviation {:.2e} over 100 iterations", worst));
}

Outcome netsim_criterion(const std::vector<testing::CorpusCase>& corpus) {
  double worst = 0.0;
  std::size_t audit_fail = 0, count_fail = 0;
  for (const auto& c : corpus) {
    const auto ref = run_algorithm(c.problem, c.schedule, c.params, c.initial, c.iterations);
    const auto sim = netsim::run_netsim(c.problem, c.schedule, c.params, c.initial, c.iterations);
    for (std::size_t k = 0; k < ref.x.size(); ++k) {
      worst = std::max({worst, max_abs_diff(ref.x[k], sim.trace.x[k]), max_abs_diff(ref.y[k], sim.trace.y[k])});
    }
    for (std::size_t k = 0; k < ref.v.size(); ++k) {
      worst = std::max({worst, max_abs_diff(ref.v[k], sim.trace.v[k]), max_abs_diff(ref.u[k], sim.trace.u[k])});
    }
    const auto audit = netsim::locality_audit(sim.ledger, c.schedule, c.params.m, c.iterations);
    if (!audit.passed) ++audit_fail;
    for (std::size_t k = 0; k < c.iterations; ++k) {
      std::size_t expected = 0;
      for (std::size_t l = 1; l <= c.params.m; ++l) {
        expected += c.schedule.matrix_at(k, l, c.params.m).off_diagonal_links();
      }
      if (audit.messages_per_iteration[k] != expected) ++count_fail;
    }
  }
  return verdict(worst <= kTrajectoryTol && audit_fail == 0 && count_fail == 0,
                 fmt::format("{} runs; max deviation {:.2e}; audit failures {}; message-count mismatches {}",
                             corpus.size(), worst, audit_fail, count_fail));
}

Outcome localization_criterion() {
  const auto cfg = load_config(std::string(TVDOPT_CONFIG_DIR) + "/localization.ini");
  const auto run = resolve(cfg);
  const Vector target{cfg.localization.target[0], cfg.localization.target[1]};
  const double alpha = optimal_stepsize(run.problem, target);
  const auto trace = run_algorithm(run.problem, run.schedule, run.params, run.initial, cfg.iterations);
  const auto central = centralized_gd(run.problem, run.params.alpha, run.centralized_start, cfg.iterations);
  Vector errors, central_errors;
  for (const auto& x : trace.x) errors.push_back(max_agent_error(x, target));
  for (const auto& x : central) central_errors.push_back(std::hypot(x[0] - target[0], x[1] - target[1]));
  const double rate = fit_rate(errors);
  const double central_rate = fit_rate(central_errors);
  const bool ok = std::abs(alpha - 2.0) <= 1e-12 && run.params.alpha == alpha &&
                  errors.back() < kLocalizationErrorTol && central_errors.back() < kLocalizationErrorTol &&
                  std::abs(rate - central_rate) <= kRateMatch;
  return verdict(ok, fmt::format("alpha {:.12g}, m {}, sigma {:.6f}; final errors {:.2e} / {:.2e}; rates {:.4f} / {:.4f}",
                                 alpha, run.params.m, run.params.sigma, errors.back(), central_errors.back(),
                                 rate, central_rate));
}

Outcome gradient_criterion() {
  const auto cfg = load_config(std::string(TVDOPT_CONFIG_DIR) + "/localization.ini");
  const auto& loc = cfg.localization;
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> box(-0.5, 2.5);
  double worst_grad = 0.0;
  double worst_trace = 0.0;
  for (std::size_t i = 0; i < loc.agents.size(); ++i) {
    const auto f = localization_objective(loc, i);
    std::vector<Vector> points;
    while (points.size() < 100) {
      Vector x{box(rng), box(rng)};
      if (std::hypot(x[0] - loc.agents[i][0], x[1] - loc.agents[i][1]) > 0.05) points.push_back(x);
    }
    worst_grad = std::max(worst_grad, check_gradient(*f, points).worst_relative_error);
    const double tr = *f->hessian_trace(Vector{loc.target[0], loc.target[1]});
    worst_trace = std::max(worst_trace, std::abs(tr - 1.0));
  }
  return verdict(worst_grad <= kGradientRelTol && worst_trace <= kTraceTol,
                 fmt::format("worst relative gradient error {:.2e}; max |trace - 1| = {:.2e}", worst_grad,
                             worst_trace));
}

Outcome figure_data_criterion() {
  std::ostringstream g1, g2, r1, r2;
  const Range axis{0.01, 0.99};
  cmd_grid(axis, axis, 50, g1);
  cmd_grid(axis, axis, 50, g2);
  cmd_rates(axis, axis, 50, r1);
  cmd_rates(axis, axis, 50, r2);
  const bool deterministic = g1.str() == g2.str() && r1.str() == r2.str();

  std::istringstream in(r1.str());
  std::string line;
  std::getline(in, line);
  const bool header = line == "rho,sigma,m,per_step_rate";
  std::size_t rows = 0, bad = 0;
  double lo = 1.0, hi = 0.0;
  while (std::getline(in, line)) {
    double rho = 0, sigma = 0, rate = 0;
    std::size_t m = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%zu,%lf", &rho, &sigma, &m, &rate) != 4) {
      ++bad;
      continue;
    }
    ++rows;
    lo = std::min({lo, rho, sigma});
    hi = std::max({hi, rho, sigma});
    const std::size_t expected_m = testing::brute_force_rounds(rho, sigma);
    if (m != expected_m || std::abs(rate - std::pow(rho, 1.0 / static_cast<double>(expected_m))) > 1e-15) ++bad;
  }
  const bool ok = deterministic && header && rows == 2500 && bad == 0 && lo <= 0.01 && hi >= 0.99;
  return verdict(ok, fmt::format("{} rows, axes [{:.2f}, {:.2f}], {} bad rows, deterministic {}", rows, lo, hi,
                                 bad, deterministic));
}

}  // namespace

int main() {
  const auto corpus = testing::test_corpus();
  struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"AC1 spectral gap of the reference pair", 0.1, spectral_gap_criterion},
      {"AC2 double stochasticity", 0.1, double_stochastic_criterion},
      {"AC3 communication-round formula", 1.0, comm_rounds_criterion},
      {"AC4 one-point convexity to contraction", 5.0, contraction_criterion},
      {"AC5 linear rate", 5.0, rate_criterion},
      {"AC6 Lyapunov decrease", 5.0, [&] { return lyapunov_criterion(corpus); }},
      {"AC7 conservation invariants", 5.0, [&] { return conservation_criterion(corpus); }},
      {"AC8 single-agent reduction", 1.0, single_agent_criterion},
      {"AC9 message-passing equivalence", 5.0, [&] { return netsim_criterion(corpus); }},
      {"AC10 localization run", 10.0, localization_criterion},
      {"AC11 gradient checks", 1.0, gradient_criterion},
      {"AC12 figure data", 5.0, figure_data_criterion},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds <= c.budget_seconds;
    const bool pass = outcome.passed && in_budget;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.name << "  " << outcome.detail
              << fmt::format("  [{:.3f} s / {:.1f} s budget]", seconds, c.budget_seconds) << '\n';
  }
  std::cout << (failed == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failed)) << '\n';
  return failed;
}

#include "tvdopt/analysis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tvdopt/errors.hpp"
#include "tvdopt/kernels.hpp"

namespace tvdopt {

StackedVector average_part(const StackedVector& z) {
  const std::size_t n = z.agents();
  Vector mean(z.dim(), 0.0);
  for (std::size_t i = 0; i < n; ++i) kernels::axpy(1.0, z.block(i), mean);
  for (double& v : mean) v /= static_cast<double>(n);
  return StackedVector::consensus(n, mean);
}

StackedVector disagreement_part(const StackedVector& z) { return z - average_part(z); }

double inner(const StackedVector& a, const StackedVector& b) {
  if (a.size() != b.size()) throw ConfigError("stacked vectors have different shapes");
  return kernels::dot(a.flat(), b.flat());
}

double squared_norm(const StackedVector& z) { return kernels::squared_norm(z.flat()); }

double lyapunov(const StackedVector& xbar, const StackedVector& ybar, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw DomainError("Lyapunov weight lambda must be in (0, 1)");
  }
  const StackedVector ax = average_part(xbar);
  const StackedVector dx = xbar - ax;
  const StackedVector dy = disagreement_part(ybar);
  return squared_norm(ax) + squared_norm(dx) + 2.0 * lambda * inner(dx, dy) +
         lambda * squared_norm(dy);
}

FixedPoint fixed_point(const Problem& problem, const AlgorithmParams& params) {
  if (!problem.optimizer()) {
    throw UnsupportedError("Lyapunov analysis needs the problem's optimizer x*");
  }
  const auto& xstar = *problem.optimizer();
  const std::size_t n = problem.agents();
  FixedPoint fp{StackedVector::consensus(n, xstar), StackedVector(n, problem.dim()),
                StackedVector(n, problem.dim())};
  Vector g(problem.dim());
  for (std::size_t i = 0; i < n; ++i) {
    problem.local(i).gradient(xstar, g);
    kernels::axpby(1.0, xstar, -params.alpha, g, fp.u.block(i));
    kernels::axpby(1.0 / params.lambda, fp.u.block(i), -1.0 / params.lambda, xstar,
                   fp.y.block(i));
  }
  return fp;
}

LyapunovReport lyapunov_trace(const RunTrace& trace, const FixedPoint& fp,
                              const AlgorithmParams& params, double tolerance) {
  const double rho2 = params.rho * params.rho;
  const double lambda = params.lambda;
  const double s0 = sigma0(params.rho);
  const double s02 = s0 * s0;

  LyapunovReport report;
  report.max_delta = -std::numeric_limits<double>::infinity();
  report.max_term = -std::numeric_limits<double>::infinity();
  const std::size_t count = trace.x.size();
  report.records.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    report.records.push_back(
        {k, lyapunov(trace.x[k] - fp.x, trace.y[k] - fp.y, lambda), std::nullopt, std::nullopt});
  }
  for (std::size_t k = 0; k + 1 < count; ++k) {
    auto& rec = report.records[k];
    const double delta = report.records[k + 1].value - rho2 * rec.value;
    rec.delta = delta;

    const StackedVector xbar = trace.x[k] - fp.x;
    const StackedVector ybar = trace.y[k] - fp.y;
    const StackedVector vbar = trace.v[k] - fp.x;
    const StackedVector ubar = trace.u[k] - fp.u;
    StackedVector mixed = xbar + ybar;
    kernels::axpby(1.0, vbar.flat(), lambda, mixed.flat(), mixed.flat());
    DeltaVTerms terms;
    terms.gradient_term = -(rho2 * squared_norm(vbar) - squared_norm(ubar));
    terms.consensus_term =
        -2.0 * rho2 * (s02 * squared_norm(disagreement_part(xbar)) -
                       squared_norm(disagreement_part(vbar)));
    terms.square_term = -2.0 * s02 * squared_norm(disagreement_part(mixed));
    rec.terms = terms;

    report.max_delta = std::max(report.max_delta, delta);
    report.max_term = std::max({report.max_term, terms.gradient_term, terms.consensus_term,
                                terms.square_term});
    if (delta > tolerance) {
      report.violations.push_back(k);
      report.decreasing = false;
    }
  }
  return report;
}

std::pair<double, double> lyapunov_weight_eigenvalues(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw DomainError("Lyapunov weight lambda must be in (0, 1)");
  }
  const double mid = 1.0 + lambda;
  const double disc = std::sqrt((1.0 - lambda) * (1.0 - lambda) + 4.0 * lambda * lambda);
  const double big = (mid + disc) / 2.0;
  // det = lambda - lambda^2; avoids cancellation in (mid - disc) / 2
  const double small = (lambda - lambda * lambda) / big;
  return {small, big};
}

double error_bound_constant(double v0, double lambda) {
  if (v0 < 0.0) throw DomainError("initial Lyapunov value must be nonnegative");
  const auto [small, big] = lyapunov_weight_eigenvalues(lambda);
  return std::sqrt(big / small * v0);
}

Vector agent_errors(const StackedVector& x, std::span<const double> xstar) {
  Vector out(x.agents());
  Vector diff(x.dim());
  for (std::size_t i = 0; i < x.agents(); ++i) {
    kernels::axpby(1.0, x.block(i), -1.0, xstar, diff);
    out[i] = std::sqrt(kernels::squared_norm(diff));
  }
  return out;
}

double max_agent_error(const StackedVector& x, std::span<const double> xstar) {
  double worst = 0.0;
  for (double e : agent_errors(x, xstar)) worst = std::max(worst, e);
  return worst;
}

double fit_rate(std::span<const double> errors, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw DomainError("tail fraction must be in (0, 1]");
  }
  if (errors.empty() || !(errors.front() > 0.0)) {
    throw DegenerateFitError("rate fit needs a positive initial error");
  }
  const double floor = 1e2 * std::numeric_limits<double>::epsilon() * errors.front();
  std::size_t usable = 0;
  while (usable < errors.size() && errors[usable] >= floor && std::isfinite(errors[usable])) {
    ++usable;
  }
  const auto tail = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(usable)));
  if (tail < 10) {
    throw DegenerateFitError("rate fit needs at least 10 errors above the floor, got " +
                             std::to_string(tail));
  }
  const std::size_t start = usable - tail;
  double mean_k = 0.0;
  double mean_log = 0.0;
  for (std::size_t k = start; k < usable; ++k) {
    mean_k += static_cast<double>(k);
    mean_log += std::log(errors[k]);
  }
  mean_k /= static_cast<double>(tail);
  mean_log /= static_cast<double>(tail);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = start; k < usable; ++k) {
    const double dk = static_cast<double>(k) - mean_k;
    sxy += dk * (std::log(errors[k]) - mean_log);
    sxx += dk * dk;
  }
  return std::exp(sxy / sxx);
}

Vector locate_optimizer(const Problem& problem, double alpha, std::span<const double> x0,
                        double tolerance, std::size_t max_iterations) {
  Vector x(x0.begin(), x0.end());
  Vector g(problem.dim());
  for (std::size_t k = 0; k < max_iterations; ++k) {
    problem.gradient(x, g);
    const double step = alpha * std::sqrt(kernels::squared_norm(g));
    kernels::axpy(-alpha, g, x);
    if (step <= tolerance * std::max(1.0, std::sqrt(kernels::squared_norm(x)))) return x;
  }
  throw NumericalError("centralized solve did not reach the requested tolerance");
}

}  // namespace tvdopt

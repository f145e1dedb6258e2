#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tvdopt/algorithm.hpp"
#include "tvdopt/objective.hpp"
#include "tvdopt/stacked.hpp"

namespace tvdopt {

/// Replaces every block with the mean block: ((1/n) 1 1^T (x) I_d) z.
StackedVector average_part(const StackedVector& z);
/// z - average_part(z).
StackedVector disagreement_part(const StackedVector& z);

/// Inner product over the whole stacked vector.
double inner(const StackedVector& a, const StackedVector& b);
double squared_norm(const StackedVector& z);

/// ||avg x||^2 + ||dis x||^2 + 2 lambda <dis x, dis y> + lambda ||dis y||^2.
/// Arguments are error coordinates. lambda must lie in (0, 1).
double lyapunov(const StackedVector& xbar, const StackedVector& ybar, double lambda);

/// Stationary point of the iteration: every x_i = x*, v = x, u_i = x* -
/// alpha grad f_i(x*), y = (u - x) / lambda.
struct FixedPoint {
  StackedVector x;
  StackedVector u;
  StackedVector y;
};

/// Throws UnsupportedError if the problem has no known optimizer.
FixedPoint fixed_point(const Problem& problem, const AlgorithmParams& params);

/// The three pieces whose sum is Delta V^k = V^{k+1} - rho^2 V^k. Each is
/// nonpositive when its assumption holds:
///   gradient_term  = -(rho^2 ||vbar||^2 - ||ubar||^2)           (contraction)
///   consensus_term = -2 rho^2 (s0^2 ||dis xbar||^2 - ||dis vbar||^2)  (gossip)
///   square_term    = -2 s0^2 ||dis(vbar + lambda (xbar + ybar))||^2
struct DeltaVTerms {
  double gradient_term = 0.0;
  double consensus_term = 0.0;
  double square_term = 0.0;
  double sum() const { return gradient_term + consensus_term + square_term; }
};

struct LyapunovRecord {
  std::size_t k = 0;
  double value = 0.0;
  // V^{k+1} - rho^2 V^k; absent on the last record
  std::optional<double> delta;
  // recomputed from (x, y, v, u) at iteration k; absent on the last record
  std::optional<DeltaVTerms> terms;
};

struct LyapunovReport {
  std::vector<LyapunovRecord> records;
  double max_delta = 0.0;  // largest Delta V over the run
  double max_term = 0.0;   // largest individual term over the run
  std::vector<std::size_t> violations;  // iterations with Delta V > tolerance
  bool decreasing = true;
};

/// Evaluates V along the trace in error coordinates and flags every
/// iteration with Delta V > tolerance.
LyapunovReport lyapunov_trace(const RunTrace& trace, const FixedPoint& fp,
                              const AlgorithmParams& params, double tolerance = 1e-9);

/// Eigenvalues of [[1, lambda], [lambda, lambda]] in ascending order.
std::pair<double, double> lyapunov_weight_eigenvalues(double lambda);

/// sqrt(cond([[1, l], [l, l]]) * V0); bounds ||x_i^k - x*|| <= c rho^k.
double error_bound_constant(double v0, double lambda);

/// max_i ||x_i - x*||
double max_agent_error(const StackedVector& x, std::span<const double> xstar);

/// Per-agent errors ||x_i - x*||.
Vector agent_errors(const StackedVector& x, std::span<const double> xstar);

/// Least-squares slope of log(error) against the index over the final
/// `tail_fraction` of the usable prefix, exponentiated. The usable prefix
/// ends at the first error below 1e2 * eps * errors[0]. A constant sequence
/// gives 1.
double fit_rate(std::span<const double> errors, double tail_fraction = 0.5);

/// High-accuracy centralized solve used when x* is not known: runs
/// gradient descent until the step is below `tolerance`.
Vector locate_optimizer(const Problem& problem, double alpha, std::span<const double> x0,
                        double tolerance = 1e-12, std::size_t max_iterations = 1000000);

}  // namespace tvdopt

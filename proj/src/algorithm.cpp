#include "tvdopt/algorithm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tvdopt/errors.hpp"
#include "tvdopt/kernels.hpp"

namespace tvdopt {
namespace {

constexpr double kMinRho = 1e-6;

void check_shapes(const Problem& problem, const GossipSchedule& schedule,
                  const StackedVector& x) {
  if (schedule.agents() != problem.agents()) {
    throw ConfigError("schedule has " + std::to_string(schedule.agents()) +
                      " agents but the problem has " + std::to_string(problem.agents()));
  }
  if (x.agents() != problem.agents() || x.dim() != problem.dim()) {
    throw ConfigError("agent state shape does not match the problem");
  }
}

// out_i = sum_j w_ij in_j for every agent i
void gossip_round(const GossipMatrix& w, const StackedVector& in, StackedVector& out) {
  const std::size_t n = in.agents();
  std::vector<const double*> sources(n);
  for (std::size_t j = 0; j < n; ++j) sources[j] = in.block(j).data();
  for (std::size_t i = 0; i < n; ++i) kernels::weighted_sum(w.row(i), sources, out.block(i));
}

}  // namespace

double sigma0(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("sigma0 needs rho in (0, 1)");
  return (std::sqrt(1.0 + rho) - std::sqrt(1.0 - rho)) / 2.0;
}

double comm_rounds_expression(double r, double s) {
  if (!(r > 0.0 && r < 1.0) || !(s > 0.0 && s < 1.0)) {
    throw DomainError("communication-round expression needs r, s in (0, 1)");
  }
  return std::ceil(std::log(sigma0(r)) / std::log(s));
}

std::size_t comm_rounds(double rho, double sigma) {
  if (!(rho > 0.0 && rho < 1.0) || !(sigma > 0.0 && sigma < 1.0)) {
    throw DomainError("comm_rounds needs rho and sigma in (0, 1)");
  }
  const double target = sigma0(rho);
  const double estimate = std::ceil(std::log(target) / std::log(sigma));
  auto m = static_cast<std::size_t>(std::max(1.0, estimate));
  // log-ratio rounding can be off by one near integers; settle on pow
  while (std::pow(sigma, static_cast<double>(m)) > target) ++m;
  while (m > 1 && std::pow(sigma, static_cast<double>(m - 1)) <= target) --m;
  return m;
}

AlgorithmParams AlgorithmParams::make(double alpha, double rho, double sigma,
                                      std::optional<std::size_t> m_override) {
  if (!(alpha > 0.0)) throw DomainError("stepsize alpha must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("contraction factor rho must be in (0, 1)");
  if (!(sigma >= 0.0 && sigma < 1.0)) throw DomainError("spectral gap sigma must be in (0, 1)");
  AlgorithmParams p;
  p.alpha = alpha;
  p.rho = std::max(rho, kMinRho);
  p.sigma = sigma;
  p.lambda = std::sqrt(1.0 - p.rho * p.rho);
  if (m_override) {
    if (*m_override == 0) throw DomainError("m override must be >= 1");
    p.m = *m_override;
    p.m_overridden = true;
  } else {
    p.m = sigma == 0.0 ? 1 : comm_rounds(p.rho, sigma);
  }
  return p;
}

bool AlgorithmParams::consensus_bound_holds() const {
  return std::pow(sigma, static_cast<double>(m)) <= sigma0(rho);
}

AlgorithmState initial_state(StackedVector x0) {
  StackedVector y0(x0.agents(), x0.dim(), 0.0);
  return {std::move(x0), std::move(y0)};
}

AlgorithmState initial_state(StackedVector x0, StackedVector y0) {
  if (y0.agents() != x0.agents() || y0.dim() != x0.dim()) {
    throw ConfigError("initial x and y have different shapes");
  }
  Vector sum(y0.dim(), 0.0);
  double scale = 1.0;
  for (std::size_t i = 0; i < y0.agents(); ++i) {
    kernels::axpy(1.0, y0.block(i), sum);
    scale = std::max(scale, std::sqrt(kernels::squared_norm(y0.block(i))));
  }
  if (std::sqrt(kernels::squared_norm(sum)) > 1e-12 * scale * static_cast<double>(y0.agents())) {
    throw ConfigError("initial y must sum to zero across agents");
  }
  return {std::move(x0), std::move(y0)};
}

IterationResult algorithm_iteration(const Problem& problem, const GossipSchedule& schedule,
                                    const AlgorithmParams& params, const AlgorithmState& state,
                                    std::size_t k, Counters& counters) {
  check_shapes(problem, schedule, state.x);
  const std::size_t n = problem.agents();
  const std::size_t d = problem.dim();

  StackedVector v = state.x;
  StackedVector scratch(n, d);
  for (std::size_t l = 1; l <= params.m; ++l) {
    gossip_round(schedule.matrix_at(k, l, params.m), v, scratch);
    std::swap(v, scratch);
    counters.row_communications += n;
  }

  IterationResult result{{StackedVector(n, d), state.y}, {std::move(v), StackedVector(n, d)}};
  const StackedVector& vm = result.workspace.v;
  StackedVector& u = result.workspace.u;
  StackedVector& x_next = result.next.x;
  StackedVector& y_next = result.next.y;

  const std::size_t before = counters.gradient_evaluations;
  Vector g(d), diff(d);
  for (std::size_t i = 0; i < n; ++i) {
    problem.local(i).gradient(vm.block(i), g);
    ++counters.gradient_evaluations;
    kernels::axpby(1.0, vm.block(i), -params.alpha, g, u.block(i));
    kernels::axpby(1.0, state.x.block(i), -1.0, vm.block(i), diff);
    kernels::axpy(1.0, diff, y_next.block(i));
    kernels::axpby(1.0, u.block(i), -params.lambda, y_next.block(i), x_next.block(i));
  }
  if (counters.gradient_evaluations - before != n) {
    throw std::logic_error("iteration must evaluate exactly one gradient per agent");
  }
  return result;
}

RunTrace run_algorithm(const Problem& problem, const GossipSchedule& schedule,
                       const AlgorithmParams& params, AlgorithmState initial,
                       std::size_t iterations) {
  check_shapes(problem, schedule, initial.x);
  RunTrace trace;
  trace.params = params;
  trace.x.reserve(iterations + 1);
  trace.y.reserve(iterations + 1);
  trace.x.push_back(initial.x);
  trace.y.push_back(initial.y);
  AlgorithmState state = std::move(initial);
  for (std::size_t k = 0; k < iterations; ++k) {
    auto step = algorithm_iteration(problem, schedule, params, state, k, trace.counters);
    trace.v.push_back(std::move(step.workspace.v));
    trace.u.push_back(std::move(step.workspace.u));
    state = std::move(step.next);
    trace.x.push_back(state.x);
    trace.y.push_back(state.y);
  }
  return trace;
}

std::vector<Vector> centralized_gd(const Problem& problem, double alpha, std::span<const double> x0,
                                   std::size_t iterations) {
  if (x0.size() != problem.dim()) throw ConfigError("x0 has wrong dimension");
  std::vector<Vector> trajectory;
  trajectory.reserve(iterations + 1);
  trajectory.emplace_back(x0.begin(), x0.end());
  Vector g(problem.dim());
  for (std::size_t k = 0; k < iterations; ++k) {
    Vector next = trajectory.back();
    problem.gradient(next, g);
    kernels::axpy(-alpha, g, next);
    trajectory.push_back(std::move(next));
  }
  return trajectory;
}

std::vector<StackedVector> dgd_baseline(const Problem& problem, const GossipSchedule& schedule,
                                        double alpha, const StackedVector& x0,
                                        std::size_t iterations) {
  check_shapes(problem, schedule, x0);
  const std::size_t n = problem.agents();
  std::vector<StackedVector> trajectory{x0};
  Vector g(problem.dim());
  for (std::size_t k = 0; k < iterations; ++k) {
    const StackedVector& x = trajectory.back();
    StackedVector next(n, problem.dim());
    gossip_round(schedule.matrix_at(k, 1, 1), x, next);
    for (std::size_t i = 0; i < n; ++i) {
      problem.local(i).gradient(x.block(i), g);
      kernels::axpy(-alpha, g, next.block(i));
    }
    trajectory.push_back(std::move(next));
  }
  return trajectory;
}

}  // namespace tvdopt

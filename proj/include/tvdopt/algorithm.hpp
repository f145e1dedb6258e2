#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tvdopt/gossip.hpp"
#include "tvdopt/objective.hpp"
#include "tvdopt/stacked.hpp"

namespace tvdopt {

/// (sqrt(1+rho) - sqrt(1-rho)) / 2, the disagreement contraction the
/// m-round consensus step must achieve. Requires rho in (0, 1).
double sigma0(double rho);

/// Least m >= 1 with sigma^m <= sigma0(rho). Requires rho, sigma in (0, 1).
std::size_t comm_rounds(double rho, double sigma);

/// ceil(log_s(sigma0(r))) without the least-m correction, for exploring the
/// (r, s) landscape of the communication-round formula.
double comm_rounds_expression(double r, double s);

struct AlgorithmParams {
  double alpha = 0.0;
  double rho = 0.0;     // contraction factor actually used (after clamping)
  double sigma = 0.0;   // spectral-gap bound
  std::size_t m = 1;    // communication rounds per iteration
  double lambda = 0.0;  // sqrt(1 - rho^2)
  bool m_overridden = false;

  /// Derives m and lambda. rho below 1e-6 (e.g. mu == L) is clamped to
  /// 1e-6; sigma == 0 gives m = 1. An explicit `m_override` replaces the
  /// formula value.
  static AlgorithmParams make(double alpha, double rho, double sigma,
                              std::optional<std::size_t> m_override = std::nullopt);

  /// sigma^m <= sigma0(rho)
  bool consensus_bound_holds() const;
};

struct Counters {
  std::size_t gradient_evaluations = 0;
  // one per agent per gossip round (a weighted combination of one row)
  std::size_t row_communications = 0;
  // point-to-point messages; only the message-passing path fills this
  std::size_t messages = 0;
};

struct AlgorithmState {
  StackedVector x;
  StackedVector y;
};

/// Starting state with the given x and y = 0.
AlgorithmState initial_state(StackedVector x0);
/// Throws ConfigError unless sum_i y_i = 0 (to 1e-12 relative).
AlgorithmState initial_state(StackedVector x0, StackedVector y0);

struct IterationWorkspace {
  StackedVector v;  // v_{i,m}: after the m communication rounds
  StackedVector u;  // v_{i,m} - alpha grad f_i(v_{i,m})
};

struct IterationResult {
  AlgorithmState next;
  IterationWorkspace workspace;
};

/// One iteration: m gossip rounds, one local gradient per agent, then the
/// y and x updates.
IterationResult algorithm_iteration(const Problem& problem, const GossipSchedule& schedule,
                                    const AlgorithmParams& params, const AlgorithmState& state,
                                    std::size_t k, Counters& counters);

/// Full record of a run: x^k, y^k for k = 0..K and v^k, u^k for k < K.
struct RunTrace {
  AlgorithmParams params;
  std::vector<StackedVector> x;
  std::vector<StackedVector> y;
  std::vector<StackedVector> v;
  std::vector<StackedVector> u;
  Counters counters;

  std::size_t iterations() const { return x.empty() ? 0 : x.size() - 1; }
  std::size_t agents() const { return x.front().agents(); }
  std::size_t dim() const { return x.front().dim(); }
};

/// Vectorized reference execution of K iterations.
RunTrace run_algorithm(const Problem& problem, const GossipSchedule& schedule,
                       const AlgorithmParams& params, AlgorithmState initial,
                       std::size_t iterations);

/// x^{k+1} = x^k - alpha grad f(x^k); returns x^0..x^K.
std::vector<Vector> centralized_gd(const Problem& problem, double alpha, std::span<const double> x0,
                                   std::size_t iterations);

/// x_i^{k+1} = sum_j w_ij x_j^k - alpha grad f_i(x_i^k), one gossip round per
/// step using W^{k,1}; returns x^0..x^K.
std::vector<StackedVector> dgd_baseline(const Problem& problem, const GossipSchedule& schedule,
                                        double alpha, const StackedVector& x0,
                                        std::size_t iterations);

}  // namespace tvdopt

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tvdopt/gossip.hpp"
#include "tvdopt/objective.hpp"

namespace tvdopt {

using Point2 = std::array<double, 2>;

/// Agents at known positions measuring exact (noiseless) distances to a
/// target in the plane.
struct LocalizationConfig {
  std::vector<Point2> agents;
  Point2 target{1.0, 1.0};
  std::vector<double> ranges;  // r_i = |agent_i - target|

  /// Computes the ranges; throws ConfigError if an agent sits on the target.
  static LocalizationConfig make(std::vector<Point2> agents, Point2 target);
};

/// `count` positions drawn uniformly from [0, 2]^2, rejecting draws within
/// `exclusion` of the target.
std::vector<Point2> generate_agent_positions(std::size_t count, Point2 target, std::uint64_t seed,
                                             double exclusion = 0.1);

/// f_i(p, q) = 1/2 (|(p, q) - agent_i| - r_i)^2
class LocalizationObjective final : public LocalObjective {
 public:
  LocalizationObjective(Point2 agent, double range) : agent_(agent), range_(range) {}

  using LocalObjective::gradient;

  std::size_t dim() const override { return 2; }
  double value(std::span<const double> x) const override;
  /// (1 - r_i / d_i) (x - agent_i); throws SingularPointError at d_i = 0.
  void gradient(std::span<const double> x, std::span<double> out) const override;
  /// 2 - r_i / d_i
  std::optional<double> hessian_trace(std::span<const double> x) const override;
  /// Row-major 2 x 2 Hessian (1 - r/d) I + (r/d) e e^T with e the unit
  /// direction from the agent.
  std::array<double, 4> hessian(std::span<const double> x) const;

  Point2 agent() const { return agent_; }
  double range() const { return range_; }

 private:
  double distance(std::span<const double> x) const;

  Point2 agent_;
  double range_;
};

std::shared_ptr<const LocalizationObjective> localization_objective(const LocalizationConfig& cfg,
                                                                    std::size_t i);

/// All n local objectives with the target as the known optimizer.
Problem make_localization_problem(const LocalizationConfig& cfg);

/// 2 / ((1/n) sum_i tr(hess f_i(point))). Needs d = 2 and a positive trace
/// sum.
double optimal_stepsize(const Problem& problem, std::span<const double> point);

/// Eigenvalues (ascending) of the global Hessian (1/n) sum_i hess f_i at
/// `point`.
std::pair<double, double> global_hessian_eigenvalues(const LocalizationConfig& cfg,
                                                     std::span<const double> point);

/// max |1 - alpha lambda| over the global Hessian eigenvalues at the target:
/// the asymptotic rate of centralized gradient descent with stepsize alpha.
double target_contraction_factor(const LocalizationConfig& cfg, double alpha);

/// The two 5-agent gossip matrices used in the localization experiment.
std::pair<GossipMatrix, GossipMatrix> reference_gossip_pair();

}  // namespace tvdopt

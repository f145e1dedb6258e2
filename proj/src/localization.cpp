#include "tvdopt/localization.hpp"

#include <cmath>
#include <random>
#include <string>

#include "tvdopt/errors.hpp"

namespace tvdopt {

LocalizationConfig LocalizationConfig::make(std::vector<Point2> agents, Point2 target) {
  if (agents.empty()) throw ConfigError("localization needs at least one agent");
  LocalizationConfig cfg;
  cfg.target = target;
  cfg.ranges.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const double r = std::hypot(agents[i][0] - target[0], agents[i][1] - target[1]);
    if (!(r > 0.0)) {
      throw ConfigError("localization agent " + std::to_string(i + 1) + " sits on the target");
    }
    cfg.ranges.push_back(r);
  }
  cfg.agents = std::move(agents);
  return cfg;
}

std::vector<Point2> generate_agent_positions(std::size_t count, Point2 target, std::uint64_t seed,
                                             double exclusion) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 2.0);
  std::vector<Point2> out;
  while (out.size() < count) {
    const Point2 p{coord(rng), coord(rng)};
    if (std::hypot(p[0] - target[0], p[1] - target[1]) > exclusion) out.push_back(p);
  }
  return out;
}

double LocalizationObjective::distance(std::span<const double> x) const {
  return std::hypot(x[0] - agent_[0], x[1] - agent_[1]);
}

double LocalizationObjective::value(std::span<const double> x) const {
  const double gap = distance(x) - range_;
  return 0.5 * gap * gap;
}

void LocalizationObjective::gradient(std::span<const double> x, std::span<double> out) const {
  const double d = distance(x);
  if (d == 0.0) {
    throw SingularPointError("localization gradient is undefined at the agent's own position");
  }
  const double scale = 1.0 - range_ / d;
  out[0] = scale * (x[0] - agent_[0]);
  out[1] = scale * (x[1] - agent_[1]);
}

std::optional<double> LocalizationObjective::hessian_trace(std::span<const double> x) const {
  const double d = distance(x);
  if (d == 0.0) {
    throw SingularPointError("localization Hessian is undefined at the agent's own position");
  }
  return 2.0 - range_ / d;
}

std::array<double, 4> LocalizationObjective::hessian(std::span<const double> x) const {
  const double d = distance(x);
  if (d == 0.0) {
    throw SingularPointError("localization Hessian is undefined at the agent's own position");
  }
  const double ratio = range_ / d;
  const double ex = (x[0] - agent_[0]) / d;
  const double ey = (x[1] - agent_[1]) / d;
  const double diag = 1.0 - ratio;
  return {diag + ratio * ex * ex, ratio * ex * ey, ratio * ex * ey, diag + ratio * ey * ey};
}

std::shared_ptr<const LocalizationObjective> localization_objective(const LocalizationConfig& cfg,
                                                                    std::size_t i) {
  if (i >= cfg.agents.size()) throw ConfigError("localization agent index out of range");
  return std::make_shared<const LocalizationObjective>(cfg.agents[i], cfg.ranges[i]);
}

Problem make_localization_problem(const LocalizationConfig& cfg) {
  std::vector<ObjectivePtr> locals;
  for (std::size_t i = 0; i < cfg.agents.size(); ++i) locals.push_back(localization_objective(cfg, i));
  return Problem(std::move(locals), Vector{cfg.target[0], cfg.target[1]});
}

double optimal_stepsize(const Problem& problem, std::span<const double> point) {
  if (problem.dim() != 2 || point.size() != 2) {
    throw UnsupportedError("trace-based optimal stepsize is only valid in two dimensions");
  }
  double trace_sum = 0.0;
  for (std::size_t i = 0; i < problem.agents(); ++i) {
    const auto trace = problem.local(i).hessian_trace(point);
    if (!trace) throw UnsupportedError("local objective does not provide a Hessian trace");
    trace_sum += *trace;
  }
  const double mean_trace = trace_sum / static_cast<double>(problem.agents());
  if (!(mean_trace > 0.0)) {
    throw DegenerateCurvatureError("Hessian trace is not positive at the evaluation point");
  }
  return 2.0 / mean_trace;
}

std::pair<double, double> global_hessian_eigenvalues(const LocalizationConfig& cfg,
                                                     std::span<const double> point) {
  std::array<double, 4> h{};
  for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
    const auto hi = LocalizationObjective(cfg.agents[i], cfg.ranges[i]).hessian(point);
    for (std::size_t e = 0; e < 4; ++e) h[e] += hi[e];
  }
  for (double& e : h) e /= static_cast<double>(cfg.agents.size());
  const double mid = 0.5 * (h[0] + h[3]);
  const double radius = std::hypot(0.5 * (h[0] - h[3]), h[1]);
  return {mid - radius, mid + radius};
}

double target_contraction_factor(const LocalizationConfig& cfg, double alpha) {
  const Point2& t = cfg.target;
  const auto [lo, hi] = global_hessian_eigenvalues(cfg, t);
  return std::max(std::abs(1.0 - alpha * lo), std::abs(1.0 - alpha * hi));
}

std::pair<GossipMatrix, GossipMatrix> reference_gossip_pair() {
  GossipMatrix first({{0.0, 3.0 / 8, 1.0 / 4, 0.0, 3.0 / 8},
                      {1.0 / 8, 0.0, 3.0 / 4, 1.0 / 8, 0.0},
                      {0.0, 5.0 / 8, 0.0, 3.0 / 8, 0.0},
                      {3.0 / 8, 0.0, 0.0, 0.0, 5.0 / 8},
                      {1.0 / 2, 0.0, 0.0, 1.0 / 2, 0.0}});
  GossipMatrix second({{0.0, 1.0 / 2, 1.0 / 4, 0.0, 1.0 / 4},
                       {1.0 / 4, 0.0, 3.0 / 4, 0.0, 0.0},
                       {0.0, 1.0 / 2, 0.0, 1.0 / 2, 0.0},
                       {1.0 / 4, 0.0, 0.0, 0.0, 3.0 / 4},
                       {1.0 / 2, 0.0, 0.0, 1.0 / 2, 0.0}});
  return {std::move(first), std::move(second)};
}

}  // namespace tvdopt

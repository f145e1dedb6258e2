#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tvdopt/stacked.hpp"

namespace tvdopt {

/// Agent i's local function f_i : R^d -> R. Implementations are stateless
/// and safe to call concurrently.
class LocalObjective {
 public:
  virtual ~LocalObjective() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
  /// Trace of the Hessian, when the objective provides it.
  virtual std::optional<double> hessian_trace(std::span<const double> /*x*/) const {
    return std::nullopt;
  }

  Vector gradient(std::span<const double> x) const {
    Vector g(dim());
    gradient(x, g);
    return g;
  }
};

using ObjectivePtr = std::shared_ptr<const LocalObjective>;

/// f(x) = 1/2 x^T A x - b^T x. A is row-major d x d and symmetric.
class QuadraticObjective final : public LocalObjective {
 public:
  QuadraticObjective(std::size_t d, std::vector<double> a, std::vector<double> b);

  using LocalObjective::gradient;

  std::size_t dim() const override { return d_; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  std::optional<double> hessian_trace(std::span<const double> x) const override;

  std::span<const double> hessian() const { return a_; }
  std::span<const double> linear_term() const { return b_; }

 private:
  std::size_t d_;
  std::vector<double> a_;
  std::vector<double> b_;
};

/// Throws DomainError if A is not symmetric.
std::shared_ptr<const QuadraticObjective> quadratic_objective(std::size_t d, std::vector<double> a,
                                                              std::vector<double> b);

struct ContractionParams {
  double alpha = 0.0;
  double rho = 0.0;
};

struct StrongSmoothParams {
  double mu = 0.0;
  double L = 0.0;
};

/// alpha = 2/(L+mu), rho = (L-mu)/(L+mu). rho is 0 when mu == L.
ContractionParams params_from_one_point_convexity(StrongSmoothParams p);

struct ContractionReport {
  double worst_ratio = 0.0;
  Vector worst_sample;
  std::size_t evaluated = 0;  // samples with x != x*
  bool passed = false;
};

/// Evaluates ||x - x* - alpha (grad f(x) - grad f(x*))|| / ||x - x*|| over the
/// samples; passes iff the worst ratio is <= rho + 1e-9.
ContractionReport check_contraction(const LocalObjective& f, std::span<const double> xstar,
                                    ContractionParams p, std::span<const Vector> samples);

/// Seeded points uniformly distributed in the ball of `radius` around center.
std::vector<Vector> sample_ball(std::span<const double> center, double radius, std::size_t count,
                                std::uint64_t seed);

struct GradientCheck {
  double worst_relative_error = 0.0;
  Vector worst_point;
};

/// Central differences with step h, relative error measured as
/// ||g - g_fd|| / max(||g||, ||g_fd||, 1e-8).
GradientCheck check_gradient(const LocalObjective& f, std::span<const Vector> points,
                             double step = 1e-6);

/// The n local objectives plus, when known, the global minimizer x*.
class Problem {
 public:
  Problem(std::vector<ObjectivePtr> locals, std::optional<Vector> optimizer = std::nullopt);

  std::size_t agents() const { return locals_.size(); }
  std::size_t dim() const { return dim_; }
  const LocalObjective& local(std::size_t i) const { return *locals_[i]; }
  const std::vector<ObjectivePtr>& locals() const { return locals_; }
  const std::optional<Vector>& optimizer() const { return optimizer_; }

  /// f(x) = (1/n) sum_i f_i(x)
  double value(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;

  /// ||sum_i grad f_i(x*)||; requires a known optimizer.
  double gradient_sum_norm_at_optimizer() const;

 private:
  std::vector<ObjectivePtr> locals_;
  std::optional<Vector> optimizer_;
  std::size_t dim_ = 0;
};

struct QuadraticProblemSpec {
  std::size_t agents = 5;
  std::size_t dim = 3;
  double mu = 1.0;
  double L = 3.0;
  std::uint64_t seed = 1;
};

/// n quadratics sharing one random eigenbasis. Each Hessian has spectrum in
/// [mu, L] with both endpoints present, and the linear terms are shifted so
/// the gradients at a random x* sum to zero. Every local function satisfies
/// the contraction property with params_from_one_point_convexity(mu, L).
Problem make_quadratic_problem(const QuadraticProblemSpec& spec);

}  // namespace tvdopt

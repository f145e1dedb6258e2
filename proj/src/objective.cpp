#include "tvdopt/objective.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tvdopt/errors.hpp"
#include "tvdopt/kernels.hpp"

namespace tvdopt {

QuadraticObjective::QuadraticObjective(std::size_t d, std::vector<double> a, std::vector<double> b)
    : d_(d), a_(std::move(a)), b_(std::move(b)) {
  if (d_ == 0 || a_.size() != d_ * d_ || b_.size() != d_) {
    throw ConfigError("quadratic objective: A must be d x d and b of length d");
  }
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = i + 1; j < d_; ++j) {
      const double aij = a_[i * d_ + j];
      const double aji = a_[j * d_ + i];
      if (std::abs(aij - aji) > 1e-12 * std::max({1.0, std::abs(aij), std::abs(aji)})) {
        throw DomainError("quadratic objective: A is not symmetric");
      }
    }
  }
}

double QuadraticObjective::value(std::span<const double> x) const {
  double quad = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    quad += x[i] * kernels::dot(std::span(a_).subspan(i * d_, d_), x);
  }
  return 0.5 * quad - kernels::dot(b_, x);
}

void QuadraticObjective::gradient(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < d_; ++i) {
    out[i] = kernels::dot(std::span(a_).subspan(i * d_, d_), x) - b_[i];
  }
}

std::optional<double> QuadraticObjective::hessian_trace(std::span<const double>) const {
  double trace = 0.0;
  for (std::size_t i = 0; i < d_; ++i) trace += a_[i * d_ + i];
  return trace;
}

std::shared_ptr<const QuadraticObjective> quadratic_objective(std::size_t d, std::vector<double> a,
                                                              std::vector<double> b) {
  return std::make_shared<const QuadraticObjective>(d, std::move(a), std::move(b));
}

ContractionParams params_from_one_point_convexity(StrongSmoothParams p) {
  if (!(p.mu > 0.0) || !(p.L >= p.mu)) {
    throw DomainError("one-point convexity parameters need 0 < mu <= L");
  }
  return {2.0 / (p.L + p.mu), (p.L - p.mu) / (p.L + p.mu)};
}

ContractionReport check_contraction(const LocalObjective& f, std::span<const double> xstar,
                                    ContractionParams p, std::span<const Vector> samples) {
  const std::size_t d = f.dim();
  if (xstar.size() != d) throw ConfigError("check_contraction: x* has wrong dimension");
  const Vector g_star = f.gradient(xstar);
  ContractionReport report;
  Vector g(d), step(d);
  for (const auto& x : samples) {
    if (x.size() != d) throw ConfigError("check_contraction: sample has wrong dimension");
    double dist2 = 0.0;
    for (std::size_t e = 0; e < d; ++e) dist2 += (x[e] - xstar[e]) * (x[e] - xstar[e]);
    if (dist2 == 0.0) continue;
    f.gradient(x, g);
    for (std::size_t e = 0; e < d; ++e) {
      step[e] = x[e] - xstar[e] - p.alpha * (g[e] - g_star[e]);
    }
    const double ratio = std::sqrt(kernels::squared_norm(step) / dist2);
    ++report.evaluated;
    if (ratio > report.worst_ratio || report.worst_sample.empty()) {
      report.worst_ratio = ratio;
      report.worst_sample = x;
    }
  }
  report.passed = report.worst_ratio <= p.rho + 1e-9;
  return report;
}

std::vector<Vector> sample_ball(std::span<const double> center, double radius, std::size_t count,
                                std::uint64_t seed) {
  const std::size_t d = center.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  std::vector<Vector> out;
  out.reserve(count);
  Vector dir(d);
  for (std::size_t s = 0; s < count; ++s) {
    double len2 = 0.0;
    do {
      len2 = 0.0;
      for (double& v : dir) {
        v = normal(rng);
        len2 += v * v;
      }
    } while (len2 == 0.0);
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(d)) / std::sqrt(len2);
    Vector x(center.begin(), center.end());
    for (std::size_t e = 0; e < d; ++e) x[e] += r * dir[e];
    out.push_back(std::move(x));
  }
  return out;
}

GradientCheck check_gradient(const LocalObjective& f, std::span<const Vector> points, double step) {
  const std::size_t d = f.dim();
  GradientCheck check;
  Vector g(d), fd(d);
  for (const auto& x : points) {
    f.gradient(x, g);
    Vector probe = x;
    for (std::size_t e = 0; e < d; ++e) {
      probe[e] = x[e] + step;
      const double up = f.value(probe);
      probe[e] = x[e] - step;
      const double down = f.value(probe);
      probe[e] = x[e];
      fd[e] = (up - down) / (2.0 * step);
    }
    double diff2 = 0.0;
    for (std::size_t e = 0; e < d; ++e) diff2 += (g[e] - fd[e]) * (g[e] - fd[e]);
    const double scale =
        std::max({std::sqrt(kernels::squared_norm(g)), std::sqrt(kernels::squared_norm(fd)), 1e-8});
    const double rel = std::sqrt(diff2) / scale;
    if (rel > check.worst_relative_error || check.worst_point.empty()) {
      check.worst_relative_error = rel;
      check.worst_point = x;
    }
  }
  return check;
}

Problem::Problem(std::vector<ObjectivePtr> locals, std::optional<Vector> optimizer)
    : locals_(std::move(locals)), optimizer_(std::move(optimizer)) {
  if (locals_.empty()) throw ConfigError("problem needs at least one local objective");
  dim_ = locals_.front()->dim();
  for (const auto& f : locals_) {
    if (!f) throw ConfigError("problem has a null local objective");
    if (f->dim() != dim_) throw ConfigError("local objectives disagree on the dimension");
  }
  if (optimizer_) {
    if (optimizer_->size() != dim_) throw ConfigError("optimizer has wrong dimension");
    const double residual = gradient_sum_norm_at_optimizer();
    if (residual > 1e-6 * static_cast<double>(agents())) {
      throw ConfigError("local gradients do not sum to zero at the given optimizer (norm " +
                        std::to_string(residual) + ")");
    }
  }
}

double Problem::value(std::span<const double> x) const {
  double acc = 0.0;
  for (const auto& f : locals_) acc += f->value(x);
  return acc / static_cast<double>(agents());
}

void Problem::gradient(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  Vector g(dim_);
  for (const auto& f : locals_) {
    f->gradient(x, g);
    kernels::axpy(1.0, g, out);
  }
  for (double& v : out) v /= static_cast<double>(agents());
}

double Problem::gradient_sum_norm_at_optimizer() const {
  if (!optimizer_) throw UnsupportedError("problem has no known optimizer");
  Vector sum(dim_, 0.0), g(dim_);
  for (const auto& f : locals_) {
    f->gradient(*optimizer_, g);
    kernels::axpy(1.0, g, sum);
  }
  return std::sqrt(kernels::squared_norm(sum));
}

namespace {

// Columns of a random orthogonal matrix via Gram-Schmidt on Gaussian draws.
std::vector<Vector> random_orthonormal_basis(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<Vector> basis;
  while (basis.size() < d) {
    Vector v(d);
    for (double& x : v) x = normal(rng);
    for (const auto& q : basis) {
      const double c = kernels::dot(v, q);
      kernels::axpy(-c, q, v);
    }
    const double len = std::sqrt(kernels::squared_norm(v));
    if (len < 1e-8) continue;
    for (double& x : v) x /= len;
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace

Problem make_quadratic_problem(const QuadraticProblemSpec& spec) {
  if (spec.agents == 0 || spec.dim == 0) throw ConfigError("quadratic problem needs n, d >= 1");
  if (!(spec.mu > 0.0) || !(spec.L >= spec.mu)) {
    throw DomainError("quadratic problem needs 0 < mu <= L");
  }
  const std::size_t n = spec.agents;
  const std::size_t d = spec.dim;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> spectrum(spec.mu, spec.L);

  const auto basis = random_orthonormal_basis(d, rng);
  Vector xstar(d);
  for (double& v : xstar) v = normal(rng);

  std::vector<Vector> offsets(n, Vector(d));
  Vector mean(d, 0.0);
  for (auto& g : offsets) {
    for (double& v : g) v = normal(rng);
    kernels::axpy(1.0 / static_cast<double>(n), g, mean);
  }
  for (auto& g : offsets) kernels::axpy(-1.0, mean, g);

  std::vector<ObjectivePtr> locals;
  for (std::size_t i = 0; i < n; ++i) {
    Vector eig(d);
    if (d == 1) {
      eig[0] = i % 2 == 0 ? spec.mu : spec.L;
    } else {
      eig.front() = spec.mu;
      eig.back() = spec.L;
      for (std::size_t e = 1; e + 1 < d; ++e) eig[e] = spectrum(rng);
    }
    std::vector<double> a(d * d, 0.0);
    for (std::size_t e = 0; e < d; ++e) {
      const auto& q = basis[e];
      for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) a[r * d + c] += eig[e] * q[r] * q[c];
      }
    }
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = r + 1; c < d; ++c) a[c * d + r] = a[r * d + c];
    }
    // grad f_i(x) = A (x - x*) + g_i  =>  b = A x* - g_i
    Vector b(d);
    for (std::size_t r = 0; r < d; ++r) {
      b[r] = kernels::dot(std::span<const double>(a).subspan(r * d, d), xstar) - offsets[i][r];
    }
    locals.push_back(quadratic_objective(d, std::move(a), std::move(b)));
  }
  return Problem(std::move(locals), std::move(xstar));
}

}  // namespace tvdopt

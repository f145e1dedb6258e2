#pragma once

// Test-only oracles and generators. Nothing here calls back into the code
// paths it is used to check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tvdopt/algorithm.hpp"
#include "tvdopt/gossip.hpp"
#include "tvdopt/localization.hpp"
#include "tvdopt/objective.hpp"

namespace tvdopt::testing {

using MatrixXd = Eigen::MatrixXd;

inline MatrixXd to_eigen(const GossipMatrix& w) {
  const auto n = static_cast<Eigen::Index>(w.agents());
  MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = w(i, j);
  }
  return m;
}

/// ||W - 11^T/n||_2 from a dense Jacobi SVD.
inline double oracle_gap(const MatrixXd& w) {
  const auto n = w.rows();
  const MatrixXd d = w - MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::JacobiSVD<MatrixXd> svd(d);
  return svd.singularValues()(0);
}

inline double oracle_gap(const GossipMatrix& w) { return oracle_gap(to_eigen(w)); }

/// Least m in [1, cap] with sigma^m <= s0, by direct search.
inline std::size_t brute_force_rounds(double rho, double sigma, std::size_t cap = 10000) {
  const double s0 = (std::sqrt(1.0 + rho) - std::sqrt(1.0 - rho)) / 2.0;
  for (std::size_t m = 1; m <= cap; ++m) {
    if (std::pow(sigma, static_cast<double>(m)) <= s0) return m;
  }
  return cap + 1;
}

/// Random nonnegative doubly stochastic matrix as a convex combination of
/// permutation matrices (Birkhoff).
inline GossipMatrix random_doubly_stochastic(std::size_t n, std::mt19937_64& rng,
                                             std::size_t terms = 4) {
  std::vector<double> w(n * n, 0.0);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  std::vector<double> coeff(terms);
  double total = 0.0;
  for (double& c : coeff) total += (c = unit(rng));
  for (std::size_t t = 0; t < terms; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) w[i * n + perm[i]] += coeff[t] / total;
  }
  return {n, std::move(w)};
}

/// Symmetric d x d matrix with eigenvalues drawn from [lo, hi] in a random
/// eigenbasis; row-major.
inline std::vector<double> random_spd(std::size_t d, double lo, double hi, std::mt19937_64& rng,
                                      bool include_endpoints = false) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> spec(lo, hi);
  MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = normal(rng);
  }
  const Eigen::HouseholderQR<MatrixXd> qr(g);
  const MatrixXd q = qr.householderQ();
  Eigen::VectorXd eig(d);
  for (Eigen::Index e = 0; e < eig.size(); ++e) eig(e) = spec(rng);
  if (include_endpoints && d >= 2) {
    eig(0) = lo;
    eig(static_cast<Eigen::Index>(d) - 1) = hi;
  }
  MatrixXd a = q * eig.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose());
  std::vector<double> out(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out[i * d + j] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

inline StackedVector random_stacked(std::size_t n, std::size_t d, std::mt19937_64& rng,
                                    double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  StackedVector z(n, d);
  for (double& v : z.flat()) v = normal(rng);
  return z;
}

/// A named, fully specified run used across the equivalence and invariant
/// tests.
struct CorpusCase {
  std::string name;
  Problem problem;
  GossipSchedule schedule;
  AlgorithmParams params;
  AlgorithmState initial;
  std::size_t iterations;
  bool compliant;  // local contraction and the gossip bound hold for (alpha, rho, sigma)
};

inline std::vector<CorpusCase> test_corpus() {
  std::vector<CorpusCase> corpus;
  auto [first, second] = reference_gossip_pair();
  const std::vector<GossipMatrix> pair{first, second};

  auto add_quadratic = [&](std::string name, QuadraticProblemSpec spec, GossipSchedule schedule,
                           std::size_t iterations, std::uint64_t init_seed) {
    Problem problem = make_quadratic_problem(spec);
    const auto cp = params_from_one_point_convexity({spec.mu, spec.L});
    const auto params = AlgorithmParams::make(cp.alpha, cp.rho, schedule.max_gap());
    std::mt19937_64 rng(init_seed);
    StackedVector x0 = random_stacked(spec.agents, spec.dim, rng, 3.0);
    corpus.push_back({std::move(name), std::move(problem), std::move(schedule), params,
                      initial_state(std::move(x0)), iterations, true});
  };

  add_quadratic("quadratic/pair-random", {5, 3, 1.0, 3.0, 11},
                GossipSchedule::random_choice(pair, 42), 40, 1);
  add_quadratic("quadratic/pair-cyclic", {5, 3, 1.0, 9.0, 12}, GossipSchedule::cyclic(pair), 40, 2);
  add_quadratic("quadratic/ring-constant", {6, 2, 2.0, 5.0, 13},
                GossipSchedule::constant(GossipMatrix::ring(6)), 40, 3);
  add_quadratic("quadratic/pair-random-d4", {5, 4, 0.5, 2.0, 14},
                GossipSchedule::random_choice(pair, 7), 40, 4);
  add_quadratic("quadratic/complete", {4, 3, 1.0, 4.0, 15},
                GossipSchedule::constant(GossipMatrix::complete(4)), 30, 5);
  {
    std::mt19937_64 rng(99);
    std::vector<GossipMatrix> random_list;
    for (int t = 0; t < 3; ++t) random_list.push_back(random_doubly_stochastic(7, rng));
    add_quadratic("quadratic/birkhoff-random", {7, 3, 1.0, 2.5, 16},
                  GossipSchedule::random_choice(random_list, 5), 40, 6);
  }
  {
    // Nonconvex instance: the contraction assumption does not hold for the
    // local functions, so only execution-level properties apply.
    const auto cfg = LocalizationConfig::make(
        {{1.2739, 0.5396}, {0.0819, 0.0331}, {1.6265, 1.8255}, {1.2133, 1.4590}, {1.0872, 1.8701}},
        {1.0, 1.0});
    Problem problem = make_localization_problem(cfg);
    const double alpha = optimal_stepsize(problem, std::vector<double>{1.0, 1.0});
    const double rho = target_contraction_factor(cfg, alpha);
    auto schedule = GossipSchedule::random_choice(pair, 7);
    const auto params = AlgorithmParams::make(alpha, rho, schedule.max_gap(), 6);
    StackedVector x0(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
      x0.block(i)[0] = cfg.agents[i][0];
      x0.block(i)[1] = cfg.agents[i][1];
    }
    corpus.push_back({"localization/pair-random", std::move(problem), std::move(schedule), params,
                      initial_state(std::move(x0)), 60, false});
  }
  return corpus;
}

}  // namespace tvdopt::testing

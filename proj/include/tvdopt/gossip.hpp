#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tvdopt {

/// One round of mixing weights. Entry (i, j) is the weight agent i applies
/// to the value received from agent j; an exact zero means no link j -> i.
class GossipMatrix {
 public:
  GossipMatrix() = default;
  /// Row-major n x n weights. Throws ConfigError if `weights.size() != n*n`.
  GossipMatrix(std::size_t n, std::vector<double> weights);
  explicit GossipMatrix(const std::vector<std::vector<double>>& rows);

  static GossipMatrix identity(std::size_t n);
  /// Every entry 1/n.
  static GossipMatrix averaging(std::size_t n);
  static GossipMatrix complete(std::size_t n) { return averaging(n); }
  /// Undirected ring with weight 1/3 on self and both neighbours (n >= 3).
  static GossipMatrix ring(std::size_t n);

  std::size_t agents() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return weights_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {weights_.data() + i * n_, n_}; }
  std::span<const double> weights() const { return weights_; }

  GossipMatrix transposed() const;
  /// Number of nonzero off-diagonal weights, i.e. directed links used per round.
  std::size_t off_diagonal_links() const;

  friend bool operator==(const GossipMatrix&, const GossipMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> weights_;
};

/// Matrix product a * b (applies b first when acting on a vector).
GossipMatrix multiply(const GossipMatrix& a, const GossipMatrix& b);

/// Parses a weight written as a decimal ("0.375") or an exact fraction ("3/8").
double parse_weight(std::string_view text);

/// Parses rows separated by ';' and entries separated by whitespace or ','.
GossipMatrix parse_gossip_matrix(std::string_view text);

/// Induced 2-norm of W - (1/n) 1 1^T.
double spectral_gap(const GossipMatrix& w);

struct SpectralNormResult {
  double value = 0.0;
  std::size_t iterations = 0;
  // ||D^T u - value * v|| for the final singular pair; bounds the error in value
  double residual = 0.0;
  bool converged = false;
};

/// Largest singular value of a row-major n x n matrix by power iteration on
/// D^T D. Stops once the singular-pair residual is below `tolerance`.
SpectralNormResult spectral_norm(std::size_t n, std::span<const double> matrix,
                                 double tolerance = 1e-12, std::size_t max_iterations = 10000);

struct DoublyStochasticReport {
  std::vector<double> row_deviation;     // |sum_j w_ij - 1|
  std::vector<double> column_deviation;  // |sum_i w_ij - 1|
  double max_deviation = 0.0;
  std::size_t negative_entries = 0;
  bool passed = false;
};

/// Passes iff every row and column sums to 1 within `tolerance`. With
/// `require_nonnegative`, any negative entry also fails the check.
DoublyStochasticReport validate_doubly_stochastic(const GossipMatrix& w, double tolerance,
                                                  bool require_nonnegative = false);

enum class ScheduleKind { constant, cyclic, random_choice };

struct ScheduleOptions {
  double tolerance = 1e-9;
  bool require_nonnegative = false;
};

/// Source of the per-round matrices W^{k,l}. Immutable; every matrix is
/// validated once at construction.
class GossipSchedule {
 public:
  static GossipSchedule constant(GossipMatrix w, ScheduleOptions options = {});
  static GossipSchedule cyclic(std::vector<GossipMatrix> list, ScheduleOptions options = {});
  static GossipSchedule random_choice(std::vector<GossipMatrix> list, std::uint64_t seed,
                                      ScheduleOptions options = {});

  ScheduleKind kind() const { return kind_; }
  std::size_t agents() const { return matrices_.front().agents(); }
  const std::vector<GossipMatrix>& matrices() const { return matrices_; }
  std::uint64_t seed() const { return seed_; }
  /// Largest spectral gap over the list.
  double max_gap() const { return max_gap_; }

  /// Index into matrices() used at iteration k, round l (1-based). The
  /// cyclic kind walks the global round index k*m + (l-1), so it needs the
  /// number of rounds per iteration m.
  std::size_t index_at(std::size_t k, std::size_t l, std::size_t rounds_per_iteration) const;
  const GossipMatrix& matrix_at(std::size_t k, std::size_t l,
                                std::size_t rounds_per_iteration) const {
    return matrices_[index_at(k, l, rounds_per_iteration)];
  }

 private:
  GossipSchedule(ScheduleKind kind, std::vector<GossipMatrix> list, std::uint64_t seed,
                 ScheduleOptions options);

  ScheduleKind kind_ = ScheduleKind::constant;
  std::vector<GossipMatrix> matrices_;
  std::uint64_t seed_ = 0;
  double max_gap_ = 0.0;
};

/// Spectral gap of W^{k,m} ... W^{k,1}.
double product_gap(const GossipSchedule& schedule, std::size_t k, std::size_t m);

/// Counter-based draw in [0, 1) keyed on (seed, k, l); no hidden state.
double counter_uniform(std::uint64_t seed, std::uint64_t k, std::uint64_t l);

}  // namespace tvdopt

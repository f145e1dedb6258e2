#include "tvdopt/gossip.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "tvdopt/errors.hpp"

namespace tvdopt {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text, std::string_view whole) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("invalid weight '" + std::string(whole) + "'");
  }
  return value;
}

// D = W - (1/n) 1 1^T
std::vector<double> deviation(const GossipMatrix& w) {
  const std::size_t n = w.agents();
  const double mean = 1.0 / static_cast<double>(n);
  std::vector<double> d(w.weights().begin(), w.weights().end());
  for (double& entry : d) entry -= mean;
  return d;
}

void matvec(std::size_t n, std::span<const double> a, std::span<const double> x,
            std::span<double> out) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a[i * n + j] * x[j];
    out[i] = acc;
  }
}

void matvec_transposed(std::size_t n, std::span<const double> a, std::span<const double> x,
                       std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j] += a[i * n + j] * x[i];
  }
}

double norm(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

GossipMatrix::GossipMatrix(std::size_t n, std::vector<double> weights)
    : n_(n), weights_(std::move(weights)) {
  if (n_ == 0) throw ConfigError("gossip matrix needs at least one agent");
  if (weights_.size() != n_ * n_) {
    throw ConfigError("gossip matrix has " + std::to_string(weights_.size()) +
                      " entries, expected " + std::to_string(n_ * n_));
  }
}

GossipMatrix::GossipMatrix(const std::vector<std::vector<double>>& rows) {
  n_ = rows.size();
  if (n_ == 0) throw ConfigError("gossip matrix needs at least one agent");
  weights_.reserve(n_ * n_);
  for (const auto& r : rows) {
    if (r.size() != n_) throw ConfigError("gossip matrix must be square");
    weights_.insert(weights_.end(), r.begin(), r.end());
  }
}

GossipMatrix GossipMatrix::identity(std::size_t n) {
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) w[i * n + i] = 1.0;
  return {n, std::move(w)};
}

GossipMatrix GossipMatrix::averaging(std::size_t n) {
  return {n, std::vector<double>(n * n, 1.0 / static_cast<double>(n))};
}

GossipMatrix GossipMatrix::ring(std::size_t n) {
  if (n < 3) throw ConfigError("ring gossip matrix needs n >= 3");
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    w[i * n + i] = 1.0 / 3.0;
    w[i * n + (i + 1) % n] = 1.0 / 3.0;
    w[i * n + (i + n - 1) % n] = 1.0 / 3.0;
  }
  return {n, std::move(w)};
}

GossipMatrix GossipMatrix::transposed() const {
  std::vector<double> t(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) t[j * n_ + i] = weights_[i * n_ + j];
  }
  return {n_, std::move(t)};
}

std::size_t GossipMatrix::off_diagonal_links() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (i != j && weights_[i * n_ + j] != 0.0) ++count;
    }
  }
  return count;
}

GossipMatrix multiply(const GossipMatrix& a, const GossipMatrix& b) {
  const std::size_t n = a.agents();
  if (b.agents() != n) throw ConfigError("gossip matrix dimension mismatch in product");
  std::vector<double> c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aik * b(k, j);
    }
  }
  return {n, std::move(c)};
}

double parse_weight(std::string_view text) {
  const std::string_view t = trim(text);
  const auto slash = t.find('/');
  if (slash == std::string_view::npos) return parse_number(t, text);
  const double num = parse_number(t.substr(0, slash), text);
  const double den = parse_number(t.substr(slash + 1), text);
  if (den == 0.0) throw ConfigError("zero denominator in weight '" + std::string(text) + "'");
  return num / den;
}

GossipMatrix parse_gossip_matrix(std::string_view text) {
  std::vector<std::vector<double>> rows;
  while (!text.empty()) {
    const auto semi = text.find(';');
    std::string_view row_text = text.substr(0, semi);
    text = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
    if (trim(row_text).empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos < row_text.size()) {
      const auto start = row_text.find_first_not_of(" \t,", pos);
      if (start == std::string_view::npos) break;
      auto end = row_text.find_first_of(" \t,", start);
      if (end == std::string_view::npos) end = row_text.size();
      row.push_back(parse_weight(row_text.substr(start, end - start)));
      pos = end;
    }
    rows.push_back(std::move(row));
  }
  return GossipMatrix(rows);
}

SpectralNormResult spectral_norm(std::size_t n, std::span<const double> matrix, double tolerance,
                                 std::size_t max_iterations) {
  SpectralNormResult result;
  double frobenius = 0.0;
  for (double v : matrix) frobenius += v * v;
  if (frobenius == 0.0) {
    result.converged = true;
    return result;
  }

  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> u(n), back(n);
  matvec(n, matrix, v, u);
  // The all-ones start lies in the null space of every doubly stochastic
  // deviation matrix; switch to a fixed perturbed start in that case.
  if (norm(u) <= 1e-8 * std::sqrt(frobenius)) {
    for (std::size_t e = 0; e < n; ++e) v[e] = 1.0 + 0.5 * std::sin(static_cast<double>(e + 1));
    const double nv = norm(v);
    for (double& x : v) x /= nv;
  }

  for (std::size_t it = 1; it <= max_iterations; ++it) {
    matvec(n, matrix, v, u);
    const double sigma = norm(u);
    result.iterations = it;
    result.value = sigma;
    if (sigma == 0.0) {
      result.converged = true;
      return result;
    }
    for (double& x : u) x /= sigma;
    matvec_transposed(n, matrix, u, back);
    double residual = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
      const double r = back[e] - sigma * v[e];
      residual += r * r;
    }
    result.residual = std::sqrt(residual);
    if (result.residual <= tolerance) {
      result.converged = true;
      return result;
    }
    const double nb = norm(back);
    for (std::size_t e = 0; e < n; ++e) v[e] = back[e] / nb;
  }
  return result;
}

double spectral_gap(const GossipMatrix& w) {
  const auto d = deviation(w);
  return spectral_norm(w.agents(), d).value;
}

DoublyStochasticReport validate_doubly_stochastic(const GossipMatrix& w, double tolerance,
                                                  bool require_nonnegative) {
  if (!(tolerance > 0.0)) throw DomainError("validation tolerance must be positive");
  const std::size_t n = w.agents();
  DoublyStochasticReport report;
  report.row_deviation.assign(n, 0.0);
  report.column_deviation.assign(n, 0.0);
  std::vector<double> col_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double wij = w(i, j);
      row_sum += wij;
      col_sum[j] += wij;
      if (wij < 0.0) ++report.negative_entries;
    }
    report.row_deviation[i] = std::abs(row_sum - 1.0);
  }
  for (std::size_t j = 0; j < n; ++j) report.column_deviation[j] = std::abs(col_sum[j] - 1.0);
  report.max_deviation =
      std::max(*std::max_element(report.row_deviation.begin(), report.row_deviation.end()),
               *std::max_element(report.column_deviation.begin(), report.column_deviation.end()));
  report.passed = report.max_deviation <= tolerance &&
                  !(require_nonnegative && report.negative_entries > 0);
  return report;
}

GossipSchedule::GossipSchedule(ScheduleKind kind, std::vector<GossipMatrix> list,
                               std::uint64_t seed, ScheduleOptions options)
    : kind_(kind), matrices_(std::move(list)), seed_(seed) {
  if (matrices_.empty()) throw ConfigError("gossip schedule needs at least one matrix");
  const std::size_t n = matrices_.front().agents();
  for (std::size_t idx = 0; idx < matrices_.size(); ++idx) {
    const auto& w = matrices_[idx];
    if (w.agents() != n) {
      throw ConfigError("gossip schedule mixes " + std::to_string(n) + "- and " +
                        std::to_string(w.agents()) + "-agent matrices");
    }
    const auto report = validate_doubly_stochastic(w, options.tolerance, options.require_nonnegative);
    if (!report.passed) {
      throw ConfigError("gossip matrix #" + std::to_string(idx + 1) +
                        " is not doubly stochastic (max deviation " +
                        std::to_string(report.max_deviation) +
                        (report.negative_entries > 0 && options.require_nonnegative
                             ? ", has negative entries)"
                             : ")"));
    }
    max_gap_ = std::max(max_gap_, spectral_gap(w));
  }
}

GossipSchedule GossipSchedule::constant(GossipMatrix w, ScheduleOptions options) {
  return {ScheduleKind::constant, {std::move(w)}, 0, options};
}

GossipSchedule GossipSchedule::cyclic(std::vector<GossipMatrix> list, ScheduleOptions options) {
  return {ScheduleKind::cyclic, std::move(list), 0, options};
}

GossipSchedule GossipSchedule::random_choice(std::vector<GossipMatrix> list, std::uint64_t seed,
                                             ScheduleOptions options) {
  return {ScheduleKind::random_choice, std::move(list), seed, options};
}

std::size_t GossipSchedule::index_at(std::size_t k, std::size_t l,
                                     std::size_t rounds_per_iteration) const {
  if (l == 0) throw ConfigError("gossip round index is 1-based");
  switch (kind_) {
    case ScheduleKind::constant:
      return 0;
    case ScheduleKind::cyclic:
      return (k * rounds_per_iteration + (l - 1)) % matrices_.size();
    case ScheduleKind::random_choice: {
      const auto idx = static_cast<std::size_t>(counter_uniform(seed_, k, l) *
                                                static_cast<double>(matrices_.size()));
      return std::min(idx, matrices_.size() - 1);
    }
  }
  return 0;
}

double product_gap(const GossipSchedule& schedule, std::size_t k, std::size_t m) {
  if (m == 0) throw DomainError("product_gap needs m >= 1");
  GossipMatrix product = schedule.matrix_at(k, 1, m);
  for (std::size_t l = 2; l <= m; ++l) product = multiply(schedule.matrix_at(k, l, m), product);
  return spectral_gap(product);
}

double counter_uniform(std::uint64_t seed, std::uint64_t k, std::uint64_t l) {
  const std::uint64_t h = mix64(mix64(mix64(seed) ^ k) ^ (l * 0xd1b54a32d192ed03ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace tvdopt

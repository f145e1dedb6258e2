#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tvdopt {

using Vector = std::vector<double>;

/// Per-agent vectors stored as n contiguous blocks of length d, i.e. the
/// concatenation [z_1; ...; z_n].
class StackedVector {
 public:
  StackedVector() = default;
  StackedVector(std::size_t agents, std::size_t dim, double fill = 0.0)
      : agents_(agents), dim_(dim), data_(agents * dim, fill) {}

  /// Repeats `block` for every agent (the consensus vector 1 (x) block).
  static StackedVector consensus(std::size_t agents, std::span<const double> block);

  std::size_t agents() const { return agents_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> block(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> block(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  friend bool operator==(const StackedVector&, const StackedVector&) = default;

 private:
  std::size_t agents_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

StackedVector operator-(const StackedVector& a, const StackedVector& b);
StackedVector operator+(const StackedVector& a, const StackedVector& b);

/// Largest absolute entrywise difference; shapes must match.
double max_abs_diff(const StackedVector& a, const StackedVector& b);

}  // namespace tvdopt

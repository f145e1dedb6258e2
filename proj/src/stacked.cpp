#include "tvdopt/stacked.hpp"

#include <algorithm>
#include <cmath>

#include "tvdopt/errors.hpp"

namespace tvdopt {
namespace {

void require_same_shape(const StackedVector& a, const StackedVector& b) {
  if (a.agents() != b.agents() || a.dim() != b.dim()) {
    throw ConfigError("stacked vectors have different shapes");
  }
}

}  // namespace

StackedVector StackedVector::consensus(std::size_t agents, std::span<const double> block) {
  StackedVector z(agents, block.size());
  for (std::size_t i = 0; i < agents; ++i) std::copy(block.begin(), block.end(), z.block(i).begin());
  return z;
}

StackedVector operator-(const StackedVector& a, const StackedVector& b) {
  require_same_shape(a, b);
  StackedVector out = a;
  auto o = out.flat();
  auto bf = b.flat();
  for (std::size_t e = 0; e < o.size(); ++e) o[e] -= bf[e];
  return out;
}

StackedVector operator+(const StackedVector& a, const StackedVector& b) {
  require_same_shape(a, b);
  StackedVector out = a;
  auto o = out.flat();
  auto bf = b.flat();
  for (std::size_t e = 0; e < o.size(); ++e) o[e] += bf[e];
  return out;
}

double max_abs_diff(const StackedVector& a, const StackedVector& b) {
  require_same_shape(a, b);
  double worst = 0.0;
  auto af = a.flat();
  auto bf = b.flat();
  for (std::size_t e = 0; e < af.size(); ++e) worst = std::max(worst, std::abs(af[e] - bf[e]));
  return worst;
}

}  // namespace tvdopt

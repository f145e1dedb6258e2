#include "tvdopt/kernels.hpp"

namespace tvdopt::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t len) {
  double acc = 0.0;
  for (std::size_t e = 0; e < len; ++e) acc += a[e] * b[e];
  return acc;
}

double squared_norm_scalar(const double* a, std::size_t len) { return dot_scalar(a, a, len); }

void axpy_scalar(double a, const double* x, double* y, std::size_t len) {
  for (std::size_t e = 0; e < len; ++e) y[e] += a * x[e];
}

void axpby_scalar(double a, const double* x, double b, const double* y, double* out,
                  std::size_t len) {
  for (std::size_t e = 0; e < len; ++e) out[e] = a * x[e] + b * y[e];
}

void weighted_sum_scalar(const double* w, const double* const* src, std::size_t count,
                         double* out, std::size_t len) {
  for (std::size_t e = 0; e < len; ++e) {
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j) acc += w[j] * src[j][e];
    out[e] = acc;
  }
}

constexpr KernelTable kScalar{Isa::scalar,  dot_scalar,   squared_norm_scalar,
                              axpy_scalar,  axpby_scalar, weighted_sum_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace tvdopt::kernels::detail

#pragma once

// Dense inner-loop kernels with a scalar reference implementation and an
// AVX2/FMA variant. The variant is picked once per process from the CPU
// features, or forced with TVDOPT_ISA=scalar|avx2.

#include <cstddef>
#include <span>
#include <string_view>

namespace tvdopt::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t len);
  double (*squared_norm)(const double* a, std::size_t len);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t len);
  // out = a * x + b * y; out may alias x or y
  void (*axpby)(double a, const double* x, double b, const double* y, double* out,
                std::size_t len);
  // out[e] = sum_j w[j] * src[j][e], folded in ascending j
  void (*weighted_sum)(const double* w, const double* const* src, std::size_t count,
                       double* out, std::size_t len);
};

std::string_view isa_name(Isa isa);
bool supported(Isa isa);

/// Table for a specific ISA; throws UnsupportedError when the CPU or the
/// build lacks it.
const KernelTable& table(Isa isa);

/// Process-wide selection, fixed on first call.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double squared_norm(std::span<const double> a) {
  return active().squared_norm(a.data(), a.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), y.size());
}
inline void axpby(double a, std::span<const double> x, double b, std::span<const double> y,
                  std::span<double> out) {
  active().axpby(a, x.data(), b, y.data(), out.data(), out.size());
}
inline void weighted_sum(std::span<const double> weights, std::span<const double* const> sources,
                         std::span<double> out) {
  active().weighted_sum(weights.data(), sources.data(), weights.size(), out.data(), out.size());
}

namespace detail {
const KernelTable& scalar_table();
// nullptr when the AVX2 translation unit was not built
const KernelTable* avx2_table();
}  // namespace detail

}  // namespace tvdopt::kernels

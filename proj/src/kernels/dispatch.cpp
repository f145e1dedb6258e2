#include <cstdlib>
#include <string>

#include "tvdopt/errors.hpp"
#include "tvdopt/kernels.hpp"

#ifndef TVDOPT_HAVE_AVX2
namespace tvdopt::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace tvdopt::kernels::detail
#endif

namespace tvdopt::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* forced = std::getenv("TVDOPT_ISA")) {
    const std::string name(forced);
    if (name == "scalar") return table(Isa::scalar);
    if (name == "avx2") return table(Isa::avx2);
    throw ConfigError("TVDOPT_ISA must be 'scalar' or 'avx2', got '" + name + "'");
  }
  return supported(Isa::avx2) ? table(Isa::avx2) : table(Isa::scalar);
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool supported(Isa isa) {
  if (isa == Isa::scalar) return true;
  return detail::avx2_table() != nullptr && cpu_has_avx2();
}

const KernelTable& table(Isa isa) {
  if (isa == Isa::scalar) return detail::scalar_table();
  if (!supported(isa)) throw UnsupportedError("AVX2/FMA kernels are not available on this CPU");
  return *detail::avx2_table();
}

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace tvdopt::kernels

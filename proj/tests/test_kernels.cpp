#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tvdopt/kernels.hpp"

using namespace tvdopt::kernels;

namespace {

std::vector<double> random_vector(std::size_t len, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  std::vector<double> v(len);
  for (double& x : v) x = dist(rng);
  return v;
}

// Error budget for a length-len reduction of |a|.|b|-sized terms.
double reduction_tolerance(const std::vector<double>& a, const std::vector<double>& b) {
  double mag = 0.0;
  for (std::size_t e = 0; e < a.size(); ++e) mag += std::abs(a[e] * b[e]);
  return 4.0 * static_cast<double>(a.size() + 1) * 2.2e-16 * mag + 1e-300;
}

}  // namespace

TEST_CASE("scalar table is always available") {
  CHECK(supported(Isa::scalar));
  CHECK(table(Isa::scalar).isa == Isa::scalar);
  CHECK(isa_name(Isa::scalar) == "scalar");
}

TEST_CASE("scalar kernels on small exact inputs") {
  const auto& k = table(Isa::scalar);
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{4, 5, 6};
  CHECK(k.dot(a.data(), b.data(), 3) == 32.0);
  CHECK(k.squared_norm(a.data(), 3) == 14.0);
  std::vector<double> y{1, 1, 1};
  k.axpy(2.0, a.data(), y.data(), 3);
  CHECK(y == std::vector<double>{3, 5, 7});
  std::vector<double> out(3);
  k.axpby(1.0, a.data(), -1.0, b.data(), out.data(), 3);
  CHECK(out == std::vector<double>{-3, -3, -3});
  const double w[2] = {0.25, 0.75};
  const double* src[2] = {a.data(), b.data()};
  k.weighted_sum(w, src, 2, out.data(), 3);
  CHECK(out == std::vector<double>{3.25, 4.25, 5.25});
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!supported(Isa::avx2)) {
    MESSAGE("AVX2/FMA not available; equivalence test skipped");
    return;
  }
  const auto& ref = table(Isa::scalar);
  const auto& simd = table(Isa::avx2);
  std::mt19937_64 rng(2024);
  for (std::size_t len = 0; len <= 67; ++len) {
    CAPTURE(len);
    const auto a = random_vector(len, rng);
    const auto b = random_vector(len, rng);
    const double tol = reduction_tolerance(a, b);
    CHECK(std::abs(ref.dot(a.data(), b.data(), len) - simd.dot(a.data(), b.data(), len)) <= tol);
    CHECK(std::abs(ref.squared_norm(a.data(), len) - simd.squared_norm(a.data(), len)) <=
          reduction_tolerance(a, a));

    auto y_ref = b;
    auto y_simd = b;
    ref.axpy(-0.7, a.data(), y_ref.data(), len);
    simd.axpy(-0.7, a.data(), y_simd.data(), len);
    for (std::size_t e = 0; e < len; ++e) CHECK(y_ref[e] == doctest::Approx(y_simd[e]).epsilon(1e-14));

    std::vector<double> o_ref(len), o_simd(len);
    ref.axpby(1.3, a.data(), -0.4, b.data(), o_ref.data(), len);
    simd.axpby(1.3, a.data(), -0.4, b.data(), o_simd.data(), len);
    for (std::size_t e = 0; e < len; ++e) CHECK(std::abs(o_ref[e] - o_simd[e]) <= 1e-14 * 8.0);

    const std::size_t count = 1 + len % 6;
    std::vector<std::vector<double>> rows;
    std::vector<const double*> src;
    std::vector<double> w(count);
    for (std::size_t j = 0; j < count; ++j) {
      rows.push_back(random_vector(len, rng));
      w[j] = 1.0 / static_cast<double>(count + j);
    }
    for (const auto& r : rows) src.push_back(r.data());
    ref.weighted_sum(w.data(), src.data(), count, o_ref.data(), len);
    simd.weighted_sum(w.data(), src.data(), count, o_simd.data(), len);
    for (std::size_t e = 0; e < len; ++e) CHECK(std::abs(o_ref[e] - o_simd[e]) <= 1e-14 * 8.0);
  }
}

TEST_CASE("axpby allows the output to alias an input") {
  for (Isa isa : {Isa::scalar, Isa::avx2}) {
    if (!supported(isa)) continue;
    const auto& k = table(isa);
    std::vector<double> x{1, 2, 3, 4, 5, 6};
    std::vector<double> y{6, 5, 4, 3, 2, 1};
    k.axpby(2.0, x.data(), 1.0, y.data(), y.data(), 6);
    CHECK(y == std::vector<double>{8, 9, 10, 11, 12, 13});
  }
}

TEST_CASE("active table is stable for the process") {
  const auto* first = &active();
  CHECK(first == &active());
}

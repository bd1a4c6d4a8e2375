#include <functional>
#include <vector>

#include "doctest.h"
#include "roadbeh/kernels.hpp"
#include "support.hpp"

namespace k = roadbeh::kernels;

namespace {

using Gemm = std::function<void(std::size_t, std::size_t, std::size_t, std::span<const double>,
                                std::span<const double>, std::span<double>)>;

// Long-double oracle with explicit transposition flags.
std::vector<double> oracle(std::size_t m, std::size_t n, std::size_t kk, const std::vector<double>& a,
                           const std::vector<double>& b, const std::vector<double>& c0, bool ta, bool tb) {
  std::vector<double> c = c0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      long double s = 0;
      for (std::size_t p = 0; p < kk; ++p) {
        const double av = ta ? a[p * m + i] : a[i * kk + p];
        const double bv = tb ? b[j * kk + p] : b[p * n + j];
        s += static_cast<long double>(av) * bv;
      }
      c[i * n + j] += static_cast<double>(s);
    }
  return c;
}

std::vector<double> rand_vec(std::size_t n, std::uint64_t seed) {
  const auto t = testing::random_tensor(1, n, seed);
  return {t.data().begin(), t.data().end()};
}

void check_variant(const Gemm& f, bool ta, bool tb) {
  const std::size_t shapes[][3] = {{1, 1, 1}, {6, 64, 64}, {16, 384, 6}, {7, 3, 5},  {64, 6, 32},
                                   {3, 9, 1}, {33, 17, 70}, {600, 40, 20}, {5, 7, 0}};
  std::uint64_t seed = 11;
  for (const auto& s : shapes) {
    const std::size_t m = s[0], n = s[1], kk = s[2];
    const auto a = rand_vec(m * kk, seed++);
    const auto b = rand_vec(kk * n, seed++);
    const auto c0 = rand_vec(m * n, seed++);
    auto c = c0;
    f(m, n, kk, a, b, c);
    const auto want = oracle(m, n, kk, a, b, c0, ta, tb);
    double worst = 0;
    for (std::size_t i = 0; i < c.size(); ++i) worst = std::max(worst, std::abs(c[i] - want[i]));
    INFO("shape " << m << "x" << n << "x" << kk);
    CHECK(worst <= 1e-12);
  }
}

}  // namespace

TEST_CASE("gemm kernels match the oracle") {
  check_variant(k::gemm_nn, false, false);
  check_variant(k::gemm_nt, false, true);
  check_variant(k::gemm_tn, true, false);
  check_variant(k::serial::gemm_nn, false, false);
  check_variant(k::serial::gemm_nt, false, true);
  check_variant(k::serial::gemm_tn, true, false);
  check_variant(k::reference::gemm_nn, false, false);
  check_variant(k::reference::gemm_nt, false, true);
  check_variant(k::reference::gemm_tn, true, false);
}

TEST_CASE("parallel and serial kernels agree bitwise") {
  const std::size_t m = 300, n = 70, kk = 50;
  const auto a = rand_vec(m * kk, 1), b = rand_vec(kk * n, 2), bt = rand_vec(n * kk, 3);
  std::vector<double> c1(m * n, 0.0), c2(m * n, 0.0);
  k::gemm_nn(m, n, kk, a, b, c1);
  k::serial::gemm_nn(m, n, kk, a, b, c2);
  CHECK(c1 == c2);
  std::fill(c1.begin(), c1.end(), 0.0);
  std::fill(c2.begin(), c2.end(), 0.0);
  k::gemm_nt(m, n, kk, a, bt, c1);
  k::serial::gemm_nt(m, n, kk, a, bt, c2);
  CHECK(c1 == c2);
}

#include "roadbeh/kernels.hpp"

#include <omp.h>

namespace roadbeh::kernels {

namespace {

bool go_parallel(std::size_t m, std::size_t n, std::size_t k) {
  return m > 1 && m * n * k >= kParallelThreshold && !omp_in_parallel() &&
         omp_get_max_threads() > 1;
}

constexpr std::size_t kNarrow = 8;

inline void row_nn(std::size_t i, std::size_t n, std::size_t k, const double* a,
                   const double* b, double* c) {
  double* ci = c + i * n;
  const double* ai = a + i * k;
  if (n < kNarrow) {
    double acc[kNarrow] = {};
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) acc[j] += ai[p] * bp[j];
    }
    for (std::size_t j = 0; j < n; ++j) ci[j] += acc[j];
    return;
  }
  for (std::size_t p = 0; p < k; ++p) {
    const double aip = ai[p];
    if (aip == 0.0) continue;
    const double* bp = b + p * n;
#pragma omp simd
    for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
  }
}

inline void row_nt(std::size_t i, std::size_t n, std::size_t k, const double* a,
                   const double* b, double* c) {
  const double* ai = a + i * k;
  double* ci = c + i * n;
  if (k < kNarrow) {
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
    return;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double* bj = b + j * k;
    double s = 0.0;
#pragma omp simd reduction(+ : s)
    for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
    ci[j] += s;
  }
}

inline void row_tn(std::size_t i, std::size_t m, std::size_t n, std::size_t k, const double* a,
                   const double* b, double* c) {
  double* ci = c + i * n;
  for (std::size_t p = 0; p < k; ++p) {
    const double api = a[p * m + i];
    if (api == 0.0) continue;
    const double* bp = b + p * n;
#pragma omp simd
    for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
  }
}

}  // namespace

namespace serial {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (std::size_t i = 0; i < m; ++i) row_nn(i, n, k, a.data(), b.data(), c.data());
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (std::size_t i = 0; i < m; ++i) row_nt(i, n, k, a.data(), b.data(), c.data());
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (std::size_t i = 0; i < m; ++i) row_tn(i, m, n, k, a.data(), b.data(), c.data());
}

}  // namespace serial

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  if (!go_parallel(m, n, k)) return serial::gemm_nn(m, n, k, a, b, c);
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i)
    row_nn(static_cast<std::size_t>(i), n, k, a.data(), b.data(), c.data());
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  if (!go_parallel(m, n, k)) return serial::gemm_nt(m, n, k, a, b, c);
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i)
    row_nt(static_cast<std::size_t>(i), n, k, a.data(), b.data(), c.data());
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  if (!go_parallel(m, n, k)) return serial::gemm_tn(m, n, k, a, b, c);
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i)
    row_tn(static_cast<std::size_t>(i), m, n, k, a.data(), b.data(), c.data());
}

namespace reference {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] += s;
    }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] += s;
    }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
      c[i * n + j] += s;
    }
}

}  // namespace reference

}  // namespace roadbeh::kernels

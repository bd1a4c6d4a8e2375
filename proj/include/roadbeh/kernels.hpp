#pragma once

// Dense GEMM kernels used by the tape. All accumulate into C (C += op(A)·op(B)),
// row-major, with explicit dimensions.
//
// `reference::` holds straightforward triple loops kept as the test oracle.
// The default kernels use a cache-friendly loop order and split rows across
// OpenMP threads once the problem is large enough to pay for a team; each row of
// C is owned by one thread and summed in a fixed order, so results do not depend
// on the thread count.

#include <cstddef>
#include <span>

namespace roadbeh::kernels {

/// Flop threshold (m·n·k) below which kernels stay on the calling thread.
inline constexpr std::size_t kParallelThreshold = 1u << 18;

// C[m×n] += A[m×k] · B[k×n]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
// C[m×n] += A[m×k] · B[n×k]ᵀ
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
// C[m×n] += A[k×m]ᵀ · B[k×n]
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);

/// Same contracts, forced onto a single thread (used by benchmarks).
namespace serial {
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
}  // namespace serial

namespace reference {
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
}  // namespace reference

}  // namespace roadbeh::kernels

#pragma once

#include <cblas.h>

#include <algorithm>
#include <cstddef>
#include <vector>

#include "panolum/parallel.hpp"

extern "C" void openblas_set_num_threads(int);

namespace panolum {

// Dense products are delegated to BLAS. Outputs are partitioned into fixed
// 8192-row chunks regardless of the worker count: each output element is
// produced by exactly one single-threaded BLAS call, and reductions combine
// chunk partials in chunk order, so results are bitwise reproducible.
inline constexpr std::size_t kGemmChunkRows = 8192;

// BLAS-internal threading would race with the pool and break the fixed
// reduction order; keep it single-threaded.
struct BlasSingleThreadInit {
  BlasSingleThreadInit() { openblas_set_num_threads(1); }
};
inline const BlasSingleThreadInit blas_single_thread_init{};

namespace detail {

inline void blas_gemm(CBLAS_TRANSPOSE ta, CBLAS_TRANSPOSE tb, int m, int n,
                      int k, double alpha, const double* a, int lda,
                      const double* b, int ldb, double beta, double* c,
                      int ldc) {
  cblas_dgemm(CblasRowMajor, ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c,
              ldc);
}

inline void blas_gemm(CBLAS_TRANSPOSE ta, CBLAS_TRANSPOSE tb, int m, int n,
                      int k, float alpha, const float* a, int lda,
                      const float* b, int ldb, float beta, float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c,
              ldc);
}

}  // namespace detail

// Y[M x N] = X[M x K] * W^T, with W stored row-major as N x K.
template <typename T>
void matmul_nt(const T* x, const T* w, T* y, std::size_t m, std::size_t n,
               std::size_t k) {
  parallel_for(m, kGemmChunkRows, [&](std::size_t lo, std::size_t hi) {
    detail::blas_gemm(CblasNoTrans, CblasTrans, static_cast<int>(hi - lo),
                      static_cast<int>(n), static_cast<int>(k), T(1),
                      x + lo * k, static_cast<int>(k), w,
                      static_cast<int>(k), T(0), y + lo * n,
                      static_cast<int>(n));
  });
}

// Y[M x K] = D[M x N] * W[N x K].
template <typename T>
void matmul_nn(const T* d, const T* w, T* y, std::size_t m, std::size_t n,
               std::size_t k) {
  parallel_for(m, kGemmChunkRows, [&](std::size_t lo, std::size_t hi) {
    detail::blas_gemm(CblasNoTrans, CblasNoTrans, static_cast<int>(hi - lo),
                      static_cast<int>(k), static_cast<int>(n), T(1),
                      d + lo * n, static_cast<int>(n), w,
                      static_cast<int>(k), T(0), y + lo * k,
                      static_cast<int>(k));
  });
}

// G[N x K] += D^T[N x M] * X[M x K]. The reduction over rows runs per fixed
// chunk and partials are added in chunk order.
template <typename T>
void matmul_tn_acc(const T* d, const T* x, T* g, std::size_t m, std::size_t n,
                   std::size_t k) {
  std::size_t chunks = (m + kGemmChunkRows - 1) / kGemmChunkRows;
  if (chunks <= 1) {
    detail::blas_gemm(CblasTrans, CblasNoTrans, static_cast<int>(n),
                      static_cast<int>(k), static_cast<int>(m), T(1), d,
                      static_cast<int>(n), x, static_cast<int>(k), T(1), g,
                      static_cast<int>(k));
    return;
  }
  std::vector<std::vector<T>> partial(chunks);
  parallel_for(chunks, 1, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      std::size_t r0 = c * kGemmChunkRows;
      std::size_t r1 = std::min(m, r0 + kGemmChunkRows);
      partial[c].assign(n * k, T(0));
      detail::blas_gemm(CblasTrans, CblasNoTrans, static_cast<int>(n),
                        static_cast<int>(k), static_cast<int>(r1 - r0), T(1),
                        d + r0 * n, static_cast<int>(n), x + r0 * k,
                        static_cast<int>(k), T(0), partial[c].data(),
                        static_cast<int>(k));
    }
  });
  for (std::size_t c = 0; c < chunks; ++c)
    for (std::size_t i = 0; i < n * k; ++i) g[i] += partial[c][i];
}

}  // namespace panolum

#pragma once

#if __has_include(<cblas-openblas.h>)
#include <cblas-openblas.h>
#define BURNSCAN_OPENBLAS 1
#elif __has_include(<cblas.h>)
#include <cblas.h>
#else
#error "no CBLAS header found"
#endif

namespace burnscan::nn {

// Row-major C(m,n) = alpha * op(A) op(B) + beta * C.
inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
                 const float* a, int lda, const float* b, int ldb, float beta,
                 float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb,
              beta, c, ldc);
}

inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
                 const double* a, int lda, const double* b, int ldb, double beta,
                 double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb,
              beta, c, ldc);
}

// Reproducible runs need a fixed thread count; BLAS reductions reorder
// otherwise.
inline void set_blas_threads(int n) {
#ifdef BURNSCAN_OPENBLAS
  openblas_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace burnscan::nn

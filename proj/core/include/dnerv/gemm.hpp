#pragma once

// Small register-blocked matrix kernels backing conv2d. Single-threaded by
// construction; the accumulation order is fixed, so results are reproducible
// run to run for a given build.

namespace dnerv::detail {

// C[M,N] += A * B.
// A is M x K with explicit row/col strides (a_rs, a_cs), so the same kernel
// serves both W·col and the transposed-W pass of the backward.
// B is K x N row-major with leading dimension ldb; C is M x N with ldc.
template <typename T>
void gemm_acc(int M, int N, int K, const T* A, long a_rs, long a_cs, const T* B, long ldb, T* C,
              long ldc);

// C[M,N] += A[M,K] · B[N,K]^T (rows of both operands contiguous).
// Used for dW = dY · col^T where the reduction axis is the long one.
template <typename T>
void gemm_nt_acc(int M, int N, int K, const T* A, long lda, const T* B, long ldb, T* C, long ldc);

extern template void gemm_acc<float>(int, int, int, const float*, long, long, const float*, long,
                                     float*, long);
extern template void gemm_acc<double>(int, int, int, const double*, long, long, const double*, long,
                                      double*, long);
extern template void gemm_nt_acc<float>(int, int, int, const float*, long, const float*, long,
                                        float*, long);
extern template void gemm_nt_acc<double>(int, int, int, const double*, long, const double*, long,
                                         double*, long);

}  // namespace dnerv::detail

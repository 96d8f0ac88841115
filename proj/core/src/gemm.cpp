#include "dnerv/gemm.hpp"

#include <algorithm>
#include <vector>

namespace dnerv::detail {

namespace {

template <typename T, int MR, int NR>
inline void micro_acc(int K, const T* A, long a_rs, long a_cs, const T* B, long ldb, T* C,
                      long ldc) {
    T acc[MR][NR];
    for (int i = 0; i < MR; ++i)
        for (int j = 0; j < NR; ++j) acc[i][j] = T(0);
    for (int k = 0; k < K; ++k) {
        const T* brow = B + static_cast<long>(k) * ldb;
        for (int i = 0; i < MR; ++i) {
            const T a = A[i * a_rs + k * a_cs];
            for (int j = 0; j < NR; ++j) acc[i][j] += a * brow[j];
        }
    }
    for (int i = 0; i < MR; ++i)
        for (int j = 0; j < NR; ++j) C[i * ldc + j] += acc[i][j];
}

template <typename T>
inline void edge_acc(int M, int N, int K, const T* A, long a_rs, long a_cs, const T* B, long ldb,
                     T* C, long ldc) {
    for (int i = 0; i < M; ++i)
        for (int k = 0; k < K; ++k) {
            const T a = A[i * a_rs + k * a_cs];
            const T* brow = B + static_cast<long>(k) * ldb;
            T* crow = C + static_cast<long>(i) * ldc;
            for (int j = 0; j < N; ++j) crow[j] += a * brow[j];
        }
}

}  // namespace

template <typename T>
void gemm_acc(int M, int N, int K, const T* A, long a_rs, long a_cs, const T* B, long ldb, T* C,
              long ldc) {
    constexpr int MR = 4;
    constexpr int NR = 32;
    constexpr int NR2 = 8;
    int j = 0;
    for (; j + NR <= N; j += NR) {
        int i = 0;
        for (; i + MR <= M; i += MR)
            micro_acc<T, MR, NR>(K, A + i * a_rs, a_rs, a_cs, B + j, ldb, C + static_cast<long>(i) * ldc + j, ldc);
        if (i < M) edge_acc(M - i, NR, K, A + i * a_rs, a_rs, a_cs, B + j, ldb, C + static_cast<long>(i) * ldc + j, ldc);
    }
    for (; j + NR2 <= N; j += NR2) {
        int i = 0;
        for (; i + MR <= M; i += MR)
            micro_acc<T, MR, NR2>(K, A + i * a_rs, a_rs, a_cs, B + j, ldb, C + static_cast<long>(i) * ldc + j, ldc);
        if (i < M) edge_acc(M - i, NR2, K, A + i * a_rs, a_rs, a_cs, B + j, ldb, C + static_cast<long>(i) * ldc + j, ldc);
    }
    if (j < N) edge_acc(M, N - j, K, A, a_rs, a_cs, B + j, ldb, C + j, ldc);
}

// A dot-product formulation runs at a fraction of the broadcast kernel's
// rate (every FMA needs fresh loads), so materialize B^T once and reuse the
// fast path. The tiled transpose is O(N*K) against O(M*N*K) multiply work.
template <typename T>
void gemm_nt_acc(int M, int N, int K, const T* A, long lda, const T* B, long ldb, T* C, long ldc) {
    std::vector<T> bt(static_cast<std::size_t>(K) * N);
    constexpr int TB = 32;
    for (int n0 = 0; n0 < N; n0 += TB) {
        const int n1 = std::min(n0 + TB, N);
        for (int k0 = 0; k0 < K; k0 += TB) {
            const int k1 = std::min(k0 + TB, K);
            for (int n = n0; n < n1; ++n)
                for (int k = k0; k < k1; ++k)
                    bt[static_cast<std::size_t>(k) * N + n] = B[static_cast<long>(n) * ldb + k];
        }
    }
    gemm_acc(M, N, K, A, lda, 1, bt.data(), N, C, ldc);
}

template void gemm_acc<float>(int, int, int, const float*, long, long, const float*, long, float*, long);
template void gemm_acc<double>(int, int, int, const double*, long, long, const double*, long, double*, long);
template void gemm_nt_acc<float>(int, int, int, const float*, long, const float*, long, float*, long);
template void gemm_nt_acc<double>(int, int, int, const double*, long, const double*, long, double*, long);

}  // namespace dnerv::detail

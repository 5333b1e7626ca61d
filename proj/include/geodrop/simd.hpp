#pragma once

#include <cstddef>

// Data-parallel double-precision kernels behind every dense inner loop.
// Two implementations ship: a scalar reference and an AVX2+FMA variant.
// The active table is resolved once at first use from CPU features, with
// the GEODROP_SIMD environment variable (auto|scalar|avx2) as an override.
// The two backends are equivalence-tested against each other; within one
// process the selection is fixed, so repeated runs on the same machine
// reproduce bit-identical results.

namespace geodrop::simd {

struct Kernels {
    // acc = sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += a*x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // x[i] *= a
    void (*scal)(double a, double* x, std::size_t n);
    // sum_i x[i]
    double (*sum)(const double* x, std::size_t n);
    // plane rotation: (x[i], y[i]) <- (c*x[i] + s*y[i], c*y[i] - s*x[i])
    void (*rot)(double* x, double* y, double c, double s, std::size_t n);
    // C(m x n) += A(m x k) * B(k x n), all row-major contiguous
    void (*gemm_nn)(const double* A, const double* B, double* C,
                    std::size_t m, std::size_t n, std::size_t k);
    // C(m x n) += A(m x k) * B(n x k)^T
    void (*gemm_nt)(const double* A, const double* B, double* C,
                    std::size_t m, std::size_t n, std::size_t k);
    // C(m x n) += A(k x m)^T * B(k x n)
    void (*gemm_tn)(const double* A, const double* B, double* C,
                    std::size_t m, std::size_t n, std::size_t k);
    // A(m x n) += a * x(m) * y(n)^T
    void (*ger)(double a, const double* x, const double* y, double* A,
                std::size_t m, std::size_t n);
    const char* name;
};

namespace scalar {
extern const Kernels kernels;
}

#if defined(__x86_64__) || defined(_M_X64)
#define GEODROP_HAS_AVX2_BUILD 1
namespace avx2 {
extern const Kernels kernels;
}
#endif

// Resolved kernel table (stable for the process lifetime).
const Kernels& active();
const char* active_name();
bool cpu_supports_avx2();

inline double dot(const double* x, const double* y, std::size_t n) {
    return active().dot(x, y, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
    active().axpy(a, x, y, n);
}
inline void scal(double a, double* x, std::size_t n) {
    active().scal(a, x, n);
}
inline double sum(const double* x, std::size_t n) {
    return active().sum(x, n);
}
inline void rot(double* x, double* y, double c, double s, std::size_t n) {
    active().rot(x, y, c, s, n);
}
inline void gemm_nn(const double* A, const double* B, double* C,
                    std::size_t m, std::size_t n, std::size_t k) {
    active().gemm_nn(A, B, C, m, n, k);
}
inline void gemm_nt(const double* A, const double* B, double* C,
                    std::size_t m, std::size_t n, std::size_t k) {
    active().gemm_nt(A, B, C, m, n, k);
}
inline void gemm_tn(const double* A, const double* B, double* C,
                    std::size_t m, std::size_t n, std::size_t k) {
    active().gemm_tn(A, B, C, m, n, k);
}
inline void ger(double a, const double* x, const double* y, double* A,
                std::size_t m, std::size_t n) {
    active().ger(a, x, y, A, m, n);
}

} // namespace geodrop::simd

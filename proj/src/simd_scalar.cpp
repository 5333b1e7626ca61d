#include "geodrop/simd.hpp"

// Reference kernels. Plain loops, no pragmas: these define the semantics
// that the vectorized backend must reproduce (up to reassociation error).

namespace geodrop::simd::scalar {

namespace {

double dot_impl(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_impl(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_impl(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sum_impl(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void rot_impl(double* x, double* y, double c, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double xi = x[i], yi = y[i];
        x[i] = c * xi + s * yi;
        y[i] = c * yi - s * xi;
    }
}

// Row-major ikj loop: the inner update is an axpy over a row of C, which
// keeps the access pattern identical to the vector backend.
void gemm_nn_impl(const double* A, const double* B, double* C,
                  std::size_t m, std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = C + i * n;
        const double* ai = A + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            double a = ai[p];
            if (a == 0.0) continue;
            const double* bp = B + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += a * bp[j];
        }
    }
}

void gemm_nt_impl(const double* A, const double* B, double* C,
                  std::size_t m, std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = A + i * k;
        double* ci = C + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            ci[j] += dot_impl(ai, B + j * k, k);
        }
    }
}

void gemm_tn_impl(const double* A, const double* B, double* C,
                  std::size_t m, std::size_t n, std::size_t k) {
    // A is k x m, B is k x n; C += A^T B accumulated as rank-1 updates,
    // which walks both inputs row-by-row (contiguous).
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = A + p * m;
        const double* bp = B + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            double a = ap[i];
            if (a == 0.0) continue;
            double* ci = C + i * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += a * bp[j];
        }
    }
}

void ger_impl(double a, const double* x, const double* y, double* A,
              std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double ax = a * x[i];
        if (ax == 0.0) continue;
        double* ai = A + i * n;
        for (std::size_t j = 0; j < n; ++j) ai[j] += ax * y[j];
    }
}

} // namespace

const Kernels kernels = {
    dot_impl, axpy_impl, scal_impl,    sum_impl,    rot_impl,
    gemm_nn_impl, gemm_nt_impl, gemm_tn_impl, ger_impl, "scalar",
};

} // namespace geodrop::simd::scalar

#include "geodrop/simd.hpp"

#ifdef GEODROP_HAS_AVX2_BUILD

#include <immintrin.h>

// AVX2+FMA kernels, 4 doubles per lane. Compiled with -mavx2 -mfma for this
// translation unit only; dispatch guarantees they never run on hardware
// without those features. Tails are handled with plain scalar loops.

namespace geodrop::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_impl(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i),
                               _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                               _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i),
                               _mm256_loadu_pd(y + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_impl(double a, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scal_impl(double a, double* x, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

double sum_impl(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i];
    return acc;
}

void rot_impl(double* x, double* y, double c, double s, std::size_t n) {
    __m256d vc = _mm256_set1_pd(c);
    __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d nx = _mm256_fmadd_pd(vc, vx, _mm256_mul_pd(vs, vy));
        __m256d ny = _mm256_fmsub_pd(vc, vy, _mm256_mul_pd(vs, vx));
        _mm256_storeu_pd(x + i, nx);
        _mm256_storeu_pd(y + i, ny);
    }
    for (; i < n; ++i) {
        double xi = x[i], yi = y[i];
        x[i] = c * xi + s * yi;
        y[i] = c * yi - s * xi;
    }
}

// Shared inner step for the nn/tn products: C[i,:] += a * B[p,:].
inline void row_axpy(double a, const double* src, double* dst, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d vd = _mm256_loadu_pd(dst + j);
        vd = _mm256_fmadd_pd(va, _mm256_loadu_pd(src + j), vd);
        _mm256_storeu_pd(dst + j, vd);
    }
    for (; j < n; ++j) dst[j] += a * src[j];
}

void gemm_nn_impl(const double* A, const double* B, double* C,
                  std::size_t m, std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = C + i * n;
        const double* ai = A + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            double a = ai[p];
            if (a == 0.0) continue;
            row_axpy(a, B + p * n, ci, n);
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
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = A + p * m;
        const double* bp = B + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            double a = ap[i];
            if (a == 0.0) continue;
            row_axpy(a, bp, C + i * n, n);
        }
    }
}

void ger_impl(double a, const double* x, const double* y, double* A,
              std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double ax = a * x[i];
        if (ax == 0.0) continue;
        row_axpy(ax, y, A + i * n, n);
    }
}

} // namespace

const Kernels kernels = {
    dot_impl, axpy_impl, scal_impl,    sum_impl,    rot_impl,
    gemm_nn_impl, gemm_nt_impl, gemm_tn_impl, ger_impl, "avx2",
};

} // namespace geodrop::simd::avx2

#endif // GEODROP_HAS_AVX2_BUILD

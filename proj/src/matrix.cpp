#include "geodrop/matrix.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "geodrop/simd.hpp"

namespace geodrop {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix M(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("from_rows: ragged rows");
        std::size_t j = 0;
        for (double v : row) M(i, j++) = v;
        ++i;
    }
    return M;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
    if (A.cols() != B.rows())
        throw ShapeError("matmul: inner dimensions differ (" +
                         std::to_string(A.cols()) + " vs " +
                         std::to_string(B.rows()) + ")");
    Matrix C(A.rows(), B.cols());
    simd::gemm_nn(A.data(), B.data(), C.data(), A.rows(), B.cols(), A.cols());
    return C;
}

Matrix matmul_nt(const Matrix& A, const Matrix& B) {
    if (A.cols() != B.cols())
        throw ShapeError("matmul_nt: inner dimensions differ");
    Matrix C(A.rows(), B.rows());
    simd::gemm_nt(A.data(), B.data(), C.data(), A.rows(), B.rows(), A.cols());
    return C;
}

Matrix matmul_tn(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows())
        throw ShapeError("matmul_tn: inner dimensions differ");
    Matrix C(A.cols(), B.cols());
    simd::gemm_tn(A.data(), B.data(), C.data(), A.cols(), B.cols(), A.rows());
    return C;
}

Vec matvec(const Matrix& A, const Vec& x) {
    if (A.cols() != x.size()) throw ShapeError("matvec: dimension mismatch");
    Vec y(A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i)
        y[i] = simd::dot(A.row(i), x.data(), A.cols());
    return y;
}

Vec matvec_t(const Matrix& A, const Vec& x) {
    if (A.rows() != x.size()) throw ShapeError("matvec_t: dimension mismatch");
    Vec y(A.cols(), 0.0);
    for (std::size_t i = 0; i < A.rows(); ++i)
        simd::axpy(x[i], A.row(i), y.data(), A.cols());
    return y;
}

Matrix transpose(const Matrix& A) {
    Matrix T(A.cols(), A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) T(j, i) = A(i, j);
    return T;
}

Matrix kron(const Matrix& A, const Matrix& B) {
    std::size_t r, c;
    // Guard the result shape before allocating; kron sizes multiply fast.
    if (__builtin_mul_overflow(A.rows(), B.rows(), &r) ||
        __builtin_mul_overflow(A.cols(), B.cols(), &c) ||
        (r != 0 && c > std::size_t(1) << 34) ||
        (c != 0 && r > std::size_t(1) << 34) ||
        (r != 0 && c != 0 && r > (std::size_t(1) << 33) / c))
        throw ShapeError("kron: result dimensions overflow");
    Matrix K(r, c);
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) {
            double a = A(i, j);
            if (a == 0.0) continue;
            for (std::size_t p = 0; p < B.rows(); ++p) {
                double* dst = K.row(i * B.rows() + p) + j * B.cols();
                simd::axpy(a, B.row(p), dst, B.cols());
            }
        }
    return K;
}

Matrix add(const Matrix& A, const Matrix& B) {
    if (!A.same_shape(B)) throw ShapeError("add: shape mismatch");
    Matrix C = A;
    simd::axpy(1.0, B.data(), C.data(), C.size());
    return C;
}

Matrix sub(const Matrix& A, const Matrix& B) {
    if (!A.same_shape(B)) throw ShapeError("sub: shape mismatch");
    Matrix C = A;
    simd::axpy(-1.0, B.data(), C.data(), C.size());
    return C;
}

Matrix scale(const Matrix& A, double a) {
    Matrix C = A;
    simd::scal(a, C.data(), C.size());
    return C;
}

double frobenius_norm(const Matrix& A) {
    return std::sqrt(simd::dot(A.data(), A.data(), A.size()));
}

double trace(const Matrix& A) {
    if (A.rows() != A.cols()) throw ShapeError("trace: matrix not square");
    double t = 0.0;
    for (std::size_t i = 0; i < A.rows(); ++i) t += A(i, i);
    return t;
}

double max_abs(const Matrix& A) {
    double m = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i)
        m = std::max(m, std::fabs(A.data()[i]));
    return m;
}

bool is_symmetric(const Matrix& A, double rel_tol) {
    if (A.rows() != A.cols()) return false;
    double scale = std::max(max_abs(A), 1e-300);
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = i + 1; j < A.cols(); ++j)
            if (std::fabs(A(i, j) - A(j, i)) > rel_tol * scale) return false;
    return true;
}

void symmetrize(Matrix& A) {
    if (A.rows() != A.cols()) throw ShapeError("symmetrize: matrix not square");
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = i + 1; j < A.cols(); ++j) {
            double v = 0.5 * (A(i, j) + A(j, i));
            A(i, j) = v;
            A(j, i) = v;
        }
}

void check_finite(const Matrix& A, const std::string& what) {
    for (std::size_t i = 0; i < A.size(); ++i)
        if (!std::isfinite(A.data()[i]))
            throw NumericalError(what + ": non-finite entry");
}

void check_finite(const Vec& v, const std::string& what) {
    for (double x : v)
        if (!std::isfinite(x)) throw NumericalError(what + ": non-finite entry");
}

double dot(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw ShapeError("dot: length mismatch");
    return simd::dot(x.data(), y.data(), x.size());
}

void axpy(double a, const Vec& x, Vec& y) {
    if (x.size() != y.size()) throw ShapeError("axpy: length mismatch");
    simd::axpy(a, x.data(), y.data(), x.size());
}

double norm2(const Vec& x) {
    return std::sqrt(simd::dot(x.data(), x.data(), x.size()));
}

double max_abs(const Vec& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::fabs(v));
    return m;
}

Matrix solve(Matrix A, Matrix B) {
    if (A.rows() != A.cols())
        throw ShapeError("solve: coefficient matrix not square");
    if (A.rows() != B.rows())
        throw ShapeError("solve: right-hand side row count mismatch");
    std::size_t n = A.rows(), m = B.cols();
    double scale = std::max(max_abs(A), 1e-300);
    for (std::size_t col = 0; col < n; ++col) {
        // partial pivot
        std::size_t piv = col;
        double best = std::fabs(A(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            double v = std::fabs(A(r, col));
            if (v > best) { best = v; piv = r; }
        }
        if (best <= 1e-13 * scale)
            throw SingularMetricError("solve: matrix is singular to working precision");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(col, j), A(piv, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(B(col, j), B(piv, j));
        }
        double inv_p = 1.0 / A(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = A(r, col) * inv_p;
            if (f == 0.0) continue;
            A(r, col) = 0.0;
            simd::axpy(-f, A.row(col) + col + 1, A.row(r) + col + 1, n - col - 1);
            simd::axpy(-f, B.row(col), B.row(r), m);
        }
    }
    // back substitution
    for (std::size_t ri = n; ri-- > 0;) {
        for (std::size_t j = 0; j < m; ++j) {
            double s = B(ri, j);
            for (std::size_t c = ri + 1; c < n; ++c) s -= A(ri, c) * B(c, j);
            B(ri, j) = s / A(ri, ri);
        }
    }
    return B;
}

Vec solve(Matrix A, const Vec& b) {
    Matrix B(b.size(), 1);
    for (std::size_t i = 0; i < b.size(); ++i) B(i, 0) = b[i];
    Matrix X = solve(std::move(A), std::move(B));
    Vec x(X.rows());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = X(i, 0);
    return x;
}

Matrix inverse(const Matrix& A) {
    return solve(A, Matrix::identity(A.rows()));
}

} // namespace geodrop

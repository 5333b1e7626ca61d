#include "geodrop/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geodrop/simd.hpp"

namespace geodrop {

namespace {

double offdiag_norm(const Matrix& M) {
    double s = 0.0;
    for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t j = i + 1; j < M.cols(); ++j) s += M(i, j) * M(i, j);
    return std::sqrt(2.0 * s);
}

} // namespace

SymEig sym_eig(const Matrix& A) {
    if (A.rows() != A.cols()) throw ShapeError("sym_eig: matrix not square");
    if (!is_symmetric(A, 1e-10))
        throw ShapeError("sym_eig: matrix not symmetric within tolerance");
    std::size_t n = A.rows();

    Matrix M = A;
    symmetrize(M);  // kill the sub-tolerance asymmetry up front
    // Vt rows are the (transposed) accumulated rotations, so each Jacobi
    // step touches two contiguous rows and can use the rot kernel.
    Matrix Vt = Matrix::identity(n);

    double fro = std::max(frobenius_norm(M), 1e-300);
    const double tol = 1e-14 * fro;
    const int max_sweeps = 100;

    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (offdiag_norm(M) <= tol) { converged = true; break; }
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = M(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                double app = M(p, p), aqq = M(q, q);
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                // rows p,q: new_p = c*old_p - s*old_q ; new_q = c*old_q + s*old_p
                simd::rot(M.row(q), M.row(p), c, s, n);
                // matching column update keeps M symmetric
                for (std::size_t i = 0; i < n; ++i) {
                    double mip = M(i, p), miq = M(i, q);
                    M(i, p) = c * mip - s * miq;
                    M(i, q) = c * miq + s * mip;
                }
                // closed-form 2x2 block (avoids cancellation drift)
                M(p, p) = app - t * apq;
                M(q, q) = aqq + t * apq;
                M(p, q) = 0.0;
                M(q, p) = 0.0;
                simd::rot(Vt.row(q), Vt.row(p), c, s, n);
            }
    }
    if (!converged && offdiag_norm(M) > tol)
        throw NumericalError("sym_eig: Jacobi sweeps did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return M(a, a) > M(b, b);
    });

    SymEig out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = M(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i)
            out.eigenvectors(i, k) = Vt(order[k], i);
    }
    return out;
}

double max_eigenvalue(const Matrix& A) {
    SymEig e = sym_eig(A);
    return e.eigenvalues.empty() ? 0.0 : e.eigenvalues.front();
}

namespace {

Matrix sym_power(const Matrix& A, double tol, bool inverse_root) {
    SymEig e = sym_eig(A);
    double top = 0.0;
    for (double l : e.eigenvalues) top = std::max(top, std::fabs(l));
    std::size_t n = A.rows();
    Matrix D(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        double l = e.eigenvalues[k];
        if (l < -tol * std::max(top, 1.0))
            throw NumericalError("sym_sqrt: matrix has a negative eigenvalue");
        l = std::max(l, 0.0);
        if (inverse_root) {
            if (l <= tol * std::max(top, 1.0))
                throw SingularMetricError("sym_inv_sqrt: matrix is singular");
            D(k, k) = 1.0 / std::sqrt(l);
        } else {
            D(k, k) = std::sqrt(l);
        }
    }
    return matmul(matmul(e.eigenvectors, D), transpose(e.eigenvectors));
}

} // namespace

Matrix sym_sqrt(const Matrix& A, double tol) { return sym_power(A, tol, false); }
Matrix sym_inv_sqrt(const Matrix& A, double tol) { return sym_power(A, tol, true); }

} // namespace geodrop

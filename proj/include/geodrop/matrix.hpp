#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "geodrop/errors.hpp"

namespace geodrop {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. The universal carrier for metrics,
// Fisher matrices, Jacobians and layer weights. Heavy products go through
// the simd kernel layer; everything else is plain loops.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }
    static Matrix diag(const Vec& d) {
        Matrix D(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) D(i, i) = d[i];
        return D;
    }
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    Vec row_vec(std::size_t i) const {
        return Vec(row(i), row(i) + cols_);
    }
    void set_row(std::size_t i, const Vec& v) {
        if (v.size() != cols_) throw ShapeError("set_row: length mismatch");
        for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
    }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool same_shape(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec data_;
};

// ---- products (simd-backed) ----
Matrix matmul(const Matrix& A, const Matrix& B);     // A(m,k) * B(k,n)
Matrix matmul_nt(const Matrix& A, const Matrix& B);  // A(m,k) * B(n,k)^T
Matrix matmul_tn(const Matrix& A, const Matrix& B);  // A(k,m)^T * B(k,n)
Vec matvec(const Matrix& A, const Vec& x);           // A x
Vec matvec_t(const Matrix& A, const Vec& x);         // A^T x

Matrix transpose(const Matrix& A);
Matrix kron(const Matrix& A, const Matrix& B);

// ---- elementwise / reductions ----
Matrix add(const Matrix& A, const Matrix& B);
Matrix sub(const Matrix& A, const Matrix& B);
Matrix scale(const Matrix& A, double a);
double frobenius_norm(const Matrix& A);
double trace(const Matrix& A);
double max_abs(const Matrix& A);
bool is_symmetric(const Matrix& A, double rel_tol = 1e-10);
void symmetrize(Matrix& A);  // A <- (A + A^T)/2
void check_finite(const Matrix& A, const std::string& what);
void check_finite(const Vec& v, const std::string& what);

// ---- vector helpers (simd-backed where it matters) ----
double dot(const Vec& x, const Vec& y);
void axpy(double a, const Vec& x, Vec& y);  // y += a x
double norm2(const Vec& x);
double max_abs(const Vec& x);

// ---- linear solves (Gaussian elimination with partial pivoting) ----
// Solve A X = B for square A; throws SingularMetricError on (near-)singular A.
Matrix solve(Matrix A, Matrix B);
Vec solve(Matrix A, const Vec& b);
Matrix inverse(const Matrix& A);

} // namespace geodrop

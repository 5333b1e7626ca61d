#pragma once

#include "geodrop/matrix.hpp"

namespace geodrop {

struct SymEig {
    Vec eigenvalues;     // sorted descending
    Matrix eigenvectors; // column k pairs with eigenvalues[k]; orthonormal
};

// Symmetric eigendecomposition by cyclic Jacobi rotations. Input must be
// symmetric within 1e-10 relative tolerance (ShapeError otherwise);
// NumericalError if the sweep cap is hit before convergence.
SymEig sym_eig(const Matrix& A);

// Convenience: largest eigenvalue of a symmetric matrix.
double max_eigenvalue(const Matrix& A);

// Symmetric square root / inverse square root via eigendecomposition.
// Negative eigenvalues below -tol*max|λ| raise NumericalError; small
// negatives are clamped to zero (sqrt) or rejected (inv_sqrt).
Matrix sym_sqrt(const Matrix& A, double tol = 1e-10);
Matrix sym_inv_sqrt(const Matrix& A, double tol = 1e-10);

} // namespace geodrop

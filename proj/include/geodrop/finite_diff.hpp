#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "geodrop/matrix.hpp"

namespace geodrop {

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;
using MatrixField = std::function<Matrix(const Vec&)>;

// Per-coordinate step: h0 scaled by the coordinate magnitude so large
// coordinates do not drown in roundoff. Default h0 balances truncation
// against 64-bit rounding for central differences.
inline double fd_step(double xi, double h0 = 1e-5) {
    return h0 * std::max(1.0, std::fabs(xi));
}

// Central-difference gradient, error O(h^2). NaN from f -> NumericalError.
Vec finite_diff_grad(const ScalarField& f, const Vec& x, double h0 = 1e-5);

// d/dx_k of a vector- or matrix-valued function, central differences.
Vec finite_diff_partial(const VectorField& f, const Vec& x, std::size_t k,
                        double h0 = 1e-5);
Matrix finite_diff_partial(const MatrixField& f, const Vec& x, std::size_t k,
                           double h0 = 1e-5);

// Same partials with one Richardson extrapolation step (evaluations at h
// and h/2, combined as (4 D(h/2) - D(h)) / 3), for noise-sensitive second
// derivative pipelines.
Vec finite_diff_partial_rich(const VectorField& f, const Vec& x, std::size_t k,
                             double h0 = 1e-5);
Matrix finite_diff_partial_rich(const MatrixField& f, const Vec& x,
                                std::size_t k, double h0 = 1e-5);

// Second partial d^2/dx_i dx_j of a vector-valued function (ambient
// Hessian slices for embeddings), central stencils.
Vec finite_diff_second(const VectorField& f, const Vec& x, std::size_t i,
                       std::size_t j, double h0 = 1e-4);

} // namespace geodrop

#pragma once

#include <functional>

#include "geodrop/finite_diff.hpp"
#include "geodrop/mask.hpp"
#include "geodrop/matrix.hpp"
#include "geodrop/tensor.hpp"

namespace geodrop {

// A Riemannian metric given as a callable point -> SPD matrix. The
// evaluator must be pure; all geometric quantities are derived from it by
// finite differences.
struct MetricField {
    std::size_t dim;
    MatrixField eval;
};

// Affine connection coefficients as a callable point -> Tensor3 (upper
// index first). No symmetry in the lower pair is assumed.
struct ConnectionField {
    std::size_t dim;
    std::function<Tensor3(const Vec&)> eval;
};

struct CurvatureReport {
    Tensor3 torsion;
    Tensor4 riemann;
    double scalar;
};

// A family of models seen as an embedding of parameter space into an
// ambient (function/output) space.
struct EmbeddedFamily {
    std::size_t param_dim;
    std::size_t ambient_dim;
    VectorField embed;
};

// Metric-compatible torsion-free connection:
//   G^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij),
// metric derivatives by Richardson-extrapolated central differences.
Tensor3 levi_civita(const MetricField& g, const Vec& theta);
ConnectionField levi_civita_connection(const MetricField& g);

// T^k_ij = G^k_ij - G^k_ji (coordinate frame).
Tensor3 torsion(const ConnectionField& gamma, const Vec& theta);
Tensor3 torsion_of(const Tensor3& gamma);

// R^r_ijk = d_i G^r_jk - d_j G^r_ik + G^r_ih G^h_jk - G^r_jh G^h_ik,
// with d by Richardson central differences at base step h0.
Tensor4 riemann(const ConnectionField& gamma, const Vec& theta,
                double h0 = 1e-4);

// Double metric contraction of the curvature of the Levi-Civita
// connection. Contraction order is anchored so the unit round sphere
// returns +2.
double scalar_curvature(const MetricField& g, const Vec& theta);

CurvatureReport curvature_report(const MetricField& g, const Vec& theta);

// Lowered coefficients: result(a,b,c) = sum_m g(c,m) gamma(m,a,b).
Tensor3 lower_connection(const Matrix& g, const Tensor3& gamma);

// The unique connection dual to gamma with respect to g, defined through
//   d_k g_ij = G_ki,j + G*_kj,i
// and returned with the upper index raised by g^{-1}.
Tensor3 dual_connection(const MetricField& g, const ConnectionField& gamma,
                        const Vec& theta);
ConnectionField dual_connection_field(const MetricField& g,
                                      const ConnectionField& gamma);

// Entrywise (1+alpha)/2 * nabla_star + (1-alpha)/2 * nabla at theta.
Tensor3 alpha_connection(const ConnectionField& nabla,
                         const ConnectionField& nabla_star, double alpha,
                         const Vec& theta);

// Truncated geodesic-ball volume ratio 1 - R r^2 / (6 (n + 2)).
double volume_ratio(double scalar, std::size_t n, double r);

// Submatrix of g(theta) on the kept coordinates.
Matrix induced_metric(const MetricField& g, const DropoutMask& mask,
                      const Vec& theta);

// Normal component of the embedding's second derivative, plus the scalar
// size of the form measured in the metric-orthonormal frame.
struct SffResult {
    std::size_t param_dim;
    std::size_t ambient_dim;
    std::vector<Vec> second;  // (i,j) -> ambient vector, index i*param_dim+j
    double norm;

    const Vec& at(std::size_t i, std::size_t j) const {
        return second[i * param_dim + j];
    }
};
SffResult second_fundamental_form(const EmbeddedFamily& fam, const Vec& theta);

// Built-in closed-form metric families.
MetricField euclidean_metric(std::size_t dim);
MetricField gaussian_fisher_metric();  // (mu, sigma), sigma > 0
MetricField sphere_metric();           // (polar, azimuth), polar in (0, pi)

} // namespace geodrop

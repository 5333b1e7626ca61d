#pragma once

#include <vector>

#include "geodrop/matrix.hpp"

namespace geodrop {

// Probability distribution over K classes.
struct Categorical {
    Vec probs;
};

// Convex combination weights, one per mixture component.
struct WeightVector {
    Vec weights;

    static WeightVector uniform(std::size_t k) {
        return WeightVector{Vec(k, 1.0 / double(k))};
    }
};

// Throw DomainError unless v is a simplex vector (entries >= 0, sum 1
// within 1e-12).
void validate_simplex(const Vec& v, const char* what);
inline void validate(const Categorical& p) { validate_simplex(p.probs, "Categorical"); }
inline void validate(const WeightVector& w) { validate_simplex(w.weights, "WeightVector"); }

// The power-family map behind the interpolation mean:
//   f_alpha(a) = a^{(1-alpha)/2}   (alpha != 1),   log a   (alpha = 1).
// a must be positive except in the odd-integer-power cases (exponent an odd
// integer), where the map is a sign-preserving bijection of the reals.
double f_alpha(double a, double alpha);
double f_alpha_inv(double b, double alpha);

// Two-point interpolation mean. normalized=true omits the c_alpha scale
// factor (the variant every downstream consumer uses); normalized=false
// applies c_alpha = 2^{2/(1-alpha)}, which diverges at alpha=1
// (UnsupportedError there).
double f_mean(double a, double b, double lambda, double alpha, bool normalized);

// Amari alpha-divergence between categoricals:
//   D_alpha[p||q] = 4/(1-alpha^2) * (1 - sum_y p_y^{(1-alpha)/2} q_y^{(1+alpha)/2})
// with the continuity endpoints D_1[p||q] = KL(q||p), D_{-1}[p||q] = KL(p||q).
double alpha_divergence(const Categorical& p, const Categorical& q, double alpha);

// Weighted combination of distributions through the f_alpha map, normalized
// back onto the simplex. Minimizes sum_k w_k * alpha_divergence(p_k, ., alpha)
// over the simplex. alpha = -1 is the arithmetic mixture, alpha = 1 the
// normalized weighted geometric mean.
Categorical alpha_integrate(const std::vector<Categorical>& dists,
                            const WeightVector& w, double alpha);

// Independent minimizer of sum_k w_k D_alpha[p_k || s] over the simplex by
// line-searched gradient descent in logit space with finite-difference
// gradients (never uses the closed form above). Oracle for alpha_integrate;
// limited to small class counts.
Categorical argmin_weighted_divergence(const std::vector<Categorical>& dists,
                                       const WeightVector& w, double alpha,
                                       double tol);

// Natural parameters of a categorical: eta_y = log(p_y / p_K), y = 1..K-1.
Vec natural_params(const Categorical& p);
Categorical from_natural_params(const Vec& eta);

} // namespace geodrop

#include "geodrop/mixtures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace geodrop {

void validate_simplex(const Vec& v, const char* what) {
    if (v.empty())
        throw DomainError(std::string(what) + ": empty probability vector");
    double s = 0.0;
    for (double x : v) {
        if (!(x >= 0.0))
            throw DomainError(std::string(what) + ": negative or NaN entry");
        s += x;
    }
    if (std::fabs(s - 1.0) > 1e-12)
        throw DomainError(std::string(what) + ": entries sum to " +
                          std::to_string(s) + ", expected 1");
}

namespace {

// Is x an odd integer (within floating tolerance)?
bool odd_integer(double x) {
    double r = std::round(x);
    return std::fabs(x - r) < 1e-12 && std::fabs(std::fmod(r, 2.0)) == 1.0;
}

double signed_pow(double a, double e) {
    // sign-preserving power for odd-integer exponents
    return a < 0.0 ? -std::pow(-a, e) : std::pow(a, e);
}

} // namespace

double f_alpha(double a, double alpha) {
    if (alpha == 1.0) {
        if (a <= 0.0) throw DomainError("f_alpha: log branch requires a > 0");
        return std::log(a);
    }
    double e = 0.5 * (1.0 - alpha);
    if (a > 0.0) return std::pow(a, e);
    if (odd_integer(e)) {
        if (a == 0.0 && e < 0.0)
            throw DomainError("f_alpha: a = 0 with negative exponent");
        return signed_pow(a, e);
    }
    throw DomainError("f_alpha: a must be positive for this alpha");
}

double f_alpha_inv(double b, double alpha) {
    if (alpha == 1.0) return std::exp(b);
    double e = 0.5 * (1.0 - alpha);
    if (b > 0.0) return std::pow(b, 1.0 / e);
    if (odd_integer(e)) {
        if (b == 0.0 && e < 0.0)
            throw DomainError("f_alpha_inv: b = 0 with negative exponent");
        return signed_pow(b, 1.0 / e);
    }
    throw DomainError("f_alpha_inv: b must be positive for this alpha");
}

double f_mean(double a, double b, double lambda, double alpha, bool normalized) {
    if (!(a > 0.0) || !(b > 0.0))
        throw DomainError("f_mean: inputs must be positive");
    if (lambda < 0.0 || lambda > 1.0)
        throw DomainError("f_mean: lambda must lie in [0,1]");
    if (alpha == 1.0) {
        if (!normalized)
            throw UnsupportedError(
                "f_mean: the c_alpha prefactor diverges at alpha = 1; "
                "only the normalized variant exists there");
        return std::exp((1.0 - lambda) * std::log(a) + lambda * std::log(b));
    }
    double m = f_alpha_inv((1.0 - lambda) * f_alpha(a, alpha) +
                               lambda * f_alpha(b, alpha),
                           alpha);
    if (normalized) return m;
    return std::pow(2.0, 2.0 / (1.0 - alpha)) * m;
}

namespace {

double kl(const Vec& p, const Vec& q, const char* what) {
    double s = 0.0;
    for (std::size_t y = 0; y < p.size(); ++y) {
        if (p[y] == 0.0) continue;
        if (q[y] == 0.0)
            throw DomainError(std::string(what) +
                              ": support violation (zero against nonzero)");
        s += p[y] * std::log(p[y] / q[y]);
    }
    return std::max(0.0, s);
}

} // namespace

double alpha_divergence(const Categorical& p, const Categorical& q,
                        double alpha) {
    validate(p);
    validate(q);
    if (p.probs.size() != q.probs.size())
        throw ShapeError("alpha_divergence: class counts differ");
    // Continuity endpoints of the generic formula.
    if (alpha == 1.0) return kl(q.probs, p.probs, "alpha_divergence");
    if (alpha == -1.0) return kl(p.probs, q.probs, "alpha_divergence");

    double ep = 0.5 * (1.0 - alpha);  // exponent on p
    double eq = 0.5 * (1.0 + alpha);  // exponent on q
    double s = 0.0;
    for (std::size_t y = 0; y < p.probs.size(); ++y) {
        double py = p.probs[y], qy = q.probs[y];
        if (py == 0.0 && qy == 0.0) continue;
        if ((py == 0.0 && ep < 0.0) || (qy == 0.0 && eq < 0.0))
            throw DomainError("alpha_divergence: support violation for this alpha");
        s += std::pow(py, ep) * std::pow(qy, eq);
    }
    return std::max(0.0, 4.0 / (1.0 - alpha * alpha) * (1.0 - s));
}

Categorical alpha_integrate(const std::vector<Categorical>& dists,
                            const WeightVector& w, double alpha) {
    if (dists.empty())
        throw DomainError("alpha_integrate: no distributions given");
    validate(w);
    if (w.weights.size() != dists.size())
        throw ShapeError("alpha_integrate: weight count != distribution count");
    std::size_t K = dists[0].probs.size();
    for (const auto& d : dists) {
        validate(d);
        if (d.probs.size() != K)
            throw ShapeError("alpha_integrate: class counts differ");
    }

    Categorical out;
    out.probs.assign(K, 0.0);

    if (alpha == -1.0) {
        // arithmetic mixture; already normalized
        for (std::size_t k = 0; k < dists.size(); ++k)
            for (std::size_t y = 0; y < K; ++y)
                out.probs[y] += w.weights[k] * dists[k].probs[y];
        return out;
    }

    if (alpha == 1.0) {
        // weighted geometric mean in log space, max-shifted before exp
        Vec L(K, 0.0);
        for (std::size_t k = 0; k < dists.size(); ++k) {
            if (w.weights[k] == 0.0) continue;
            for (std::size_t y = 0; y < K; ++y) {
                if (dists[k].probs[y] <= 0.0)
                    throw DomainError(
                        "alpha_integrate: zero probability on the log branch");
                L[y] += w.weights[k] * std::log(dists[k].probs[y]);
            }
        }
        double top = *std::max_element(L.begin(), L.end());
        double Z = 0.0;
        for (std::size_t y = 0; y < K; ++y) {
            out.probs[y] = std::exp(L[y] - top);
            Z += out.probs[y];
        }
        for (double& v : out.probs) v /= Z;
        return out;
    }

    double e = 0.5 * (1.0 - alpha);
    // A_y = sum_k w_k f_alpha(p_ky); the simplex constraint is absorbed by a
    // multiplicative Lagrange factor, so the result is f_inv(A) renormalized.
    Vec A(K, 0.0);
    for (std::size_t k = 0; k < dists.size(); ++k) {
        if (w.weights[k] == 0.0) continue;
        for (std::size_t y = 0; y < K; ++y) {
            double p = dists[k].probs[y];
            if (p == 0.0) {
                if (e < 0.0)
                    throw DomainError(
                        "alpha_integrate: zero probability on a negative-power branch");
                continue;  // f_alpha(0) = 0 for positive exponents
            }
            A[y] += w.weights[k] * std::pow(p, e);
        }
    }
    double Z = 0.0;
    for (std::size_t y = 0; y < K; ++y) {
        out.probs[y] = A[y] == 0.0 ? 0.0 : std::pow(A[y], 1.0 / e);
        Z += out.probs[y];
    }
    if (!(Z > 0.0) || !std::isfinite(Z))
        throw NumericalError("alpha_integrate: degenerate normalization");
    for (double& v : out.probs) v /= Z;
    return out;
}

Categorical argmin_weighted_divergence(const std::vector<Categorical>& dists,
                                       const WeightVector& w, double alpha,
                                       double tol) {
    if (dists.empty())
        throw DomainError("argmin_weighted_divergence: no distributions given");
    validate(w);
    std::size_t K = dists[0].probs.size();
    if (K > 10)
        throw CapacityError(
            "argmin_weighted_divergence: oracle limited to 10 classes");
    for (const auto& d : dists) {
        validate(d);
        if (d.probs.size() != K)
            throw ShapeError("argmin_weighted_divergence: class counts differ");
    }

    auto softmax = [K](const Vec& z) {
        Categorical s;
        s.probs.resize(K);
        double top = *std::max_element(z.begin(), z.end());
        double Z = 0.0;
        for (std::size_t y = 0; y < K; ++y) {
            s.probs[y] = std::exp(z[y] - top);
            Z += s.probs[y];
        }
        for (double& v : s.probs) v /= Z;
        return s;
    };
    auto objective = [&](const Vec& z) {
        Categorical s = softmax(z);
        double r = 0.0;
        for (std::size_t k = 0; k < dists.size(); ++k)
            r += w.weights[k] * alpha_divergence(dists[k], s, alpha);
        return r;
    };

    // Warm start at the arithmetic mixture (strictly positive whenever any
    // component puts mass on a class), floored away from log(0).
    Vec z(K);
    for (std::size_t y = 0; y < K; ++y) {
        double m = 0.0;
        for (std::size_t k = 0; k < dists.size(); ++k)
            m += w.weights[k] * dists[k].probs[y];
        z[y] = std::log(std::max(m, 1e-12));
    }

    double f = objective(z);
    const int max_iter = 20000;
    double step = 1.0;
    for (int it = 0; it < max_iter; ++it) {
        // central-difference gradient in logit space
        Vec g(K);
        double gmax = 0.0;
        const double h = 1e-6;
        for (std::size_t y = 0; y < K; ++y) {
            Vec zp = z, zm = z;
            zp[y] += h;
            zm[y] -= h;
            g[y] = (objective(zp) - objective(zm)) / (2.0 * h);
            gmax = std::max(gmax, std::fabs(g[y]));
        }
        if (gmax < std::min(tol, 1e-9)) return softmax(z);

        // backtracking line search
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            Vec zn = z;
            for (std::size_t y = 0; y < K; ++y) zn[y] -= step * g[y];
            double fn = objective(zn);
            if (fn < f - 1e-18) {
                z = zn;
                f = fn;
                step *= 1.5;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            if (gmax < 1e-6) return softmax(z);  // stuck at FD noise floor
            throw NumericalError(
                "argmin_weighted_divergence: line search stalled");
        }
    }
    throw NumericalError("argmin_weighted_divergence: did not converge");
}

Vec natural_params(const Categorical& p) {
    validate(p);
    std::size_t K = p.probs.size();
    double base = p.probs[K - 1];
    if (base <= 0.0)
        throw DomainError("natural_params: reference class has zero probability");
    Vec eta(K - 1);
    for (std::size_t y = 0; y + 1 < K; ++y) {
        if (p.probs[y] <= 0.0)
            throw DomainError("natural_params: zero probability entry");
        eta[y] = std::log(p.probs[y] / base);
    }
    return eta;
}

Categorical from_natural_params(const Vec& eta) {
    std::size_t K = eta.size() + 1;
    Vec z(K, 0.0);
    for (std::size_t y = 0; y + 1 < K; ++y) z[y] = eta[y];
    double top = *std::max_element(z.begin(), z.end());
    double Z = 0.0;
    Categorical p;
    p.probs.resize(K);
    for (std::size_t y = 0; y < K; ++y) {
        p.probs[y] = std::exp(z[y] - top);
        Z += p.probs[y];
    }
    for (double& v : p.probs) v /= Z;
    return p;
}

} // namespace geodrop

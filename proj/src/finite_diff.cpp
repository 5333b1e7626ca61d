#include "geodrop/finite_diff.hpp"

#include <cmath>

namespace geodrop {

namespace {

double eval_checked(const ScalarField& f, const Vec& x) {
    double v = f(x);
    if (!std::isfinite(v))
        throw NumericalError("finite_diff: function returned a non-finite value");
    return v;
}

} // namespace

Vec finite_diff_grad(const ScalarField& f, const Vec& x, double h0) {
    Vec g(x.size());
    Vec xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double h = fd_step(x[i], h0);
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        g[i] = (eval_checked(f, xp) - eval_checked(f, xm)) / (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return g;
}

namespace {

template <typename Value, typename Field>
Value central(const Field& f, const Vec& x, std::size_t k, double h) {
    Vec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    Value plus = f(xp);
    Value minus = f(xm);
    // (plus - minus) / (2h), elementwise over the carrier
    Value out = plus;
    double* o = out.data();
    const double* m = minus.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        o[i] = (o[i] - m[i]) / (2.0 * h);
        if (!std::isfinite(o[i]))
            throw NumericalError("finite_diff: non-finite derivative entry");
    }
    return out;
}

template <typename Value, typename Field>
Value richardson(const Field& f, const Vec& x, std::size_t k, double h) {
    Value dh = central<Value>(f, x, k, h);
    Value dh2 = central<Value>(f, x, k, h / 2.0);
    double* a = dh2.data();
    const double* b = dh.data();
    for (std::size_t i = 0; i < dh2.size(); ++i)
        a[i] = (4.0 * a[i] - b[i]) / 3.0;
    return dh2;
}

} // namespace

Vec finite_diff_partial(const VectorField& f, const Vec& x, std::size_t k,
                        double h0) {
    return central<Vec>(f, x, k, fd_step(x[k], h0));
}

Matrix finite_diff_partial(const MatrixField& f, const Vec& x, std::size_t k,
                           double h0) {
    return central<Matrix>(f, x, k, fd_step(x[k], h0));
}

Vec finite_diff_partial_rich(const VectorField& f, const Vec& x, std::size_t k,
                             double h0) {
    return richardson<Vec>(f, x, k, fd_step(x[k], h0));
}

Matrix finite_diff_partial_rich(const MatrixField& f, const Vec& x,
                                std::size_t k, double h0) {
    return richardson<Matrix>(f, x, k, fd_step(x[k], h0));
}

Vec finite_diff_second(const VectorField& f, const Vec& x, std::size_t i,
                       std::size_t j, double h0) {
    double hi = fd_step(x[i], h0);
    if (i == j) {
        Vec xp = x, xm = x;
        xp[i] += hi;
        xm[i] -= hi;
        Vec fp = f(xp), fm = f(xm), f0 = f(x);
        Vec out(f0.size());
        for (std::size_t t = 0; t < out.size(); ++t) {
            out[t] = (fp[t] - 2.0 * f0[t] + fm[t]) / (hi * hi);
            if (!std::isfinite(out[t]))
                throw NumericalError("finite_diff: non-finite second derivative");
        }
        return out;
    }
    double hj = fd_step(x[j], h0);
    Vec xpp = x, xpm = x, xmp = x, xmm = x;
    xpp[i] += hi; xpp[j] += hj;
    xpm[i] += hi; xpm[j] -= hj;
    xmp[i] -= hi; xmp[j] += hj;
    xmm[i] -= hi; xmm[j] -= hj;
    Vec fpp = f(xpp), fpm = f(xpm), fmp = f(xmp), fmm = f(xmm);
    Vec out(fpp.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = (fpp[t] - fpm[t] - fmp[t] + fmm[t]) / (4.0 * hi * hj);
        if (!std::isfinite(out[t]))
            throw NumericalError("finite_diff: non-finite second derivative");
    }
    return out;
}

} // namespace geodrop

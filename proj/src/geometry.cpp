#include "geodrop/geometry.hpp"

#include <cmath>

#include "geodrop/eig.hpp"

namespace geodrop {

namespace {

void check_point(const Vec& theta, std::size_t dim, const char* what) {
    if (theta.size() != dim)
        throw ShapeError(std::string(what) + ": point has length " +
                         std::to_string(theta.size()) + ", metric dimension is " +
                         std::to_string(dim));
}

Matrix eval_metric(const MetricField& g, const Vec& theta) {
    Matrix G = g.eval(theta);
    if (G.rows() != g.dim || G.cols() != g.dim)
        throw ShapeError("metric evaluator returned a wrongly shaped matrix");
    if (!is_symmetric(G, 1e-12))
        throw ShapeError("metric evaluator returned a non-symmetric matrix");
    symmetrize(G);
    return G;
}

// Central second-derivative stencil for the embedding, with entries below
// the stencil's floating-point noise floor (~eps * |f| / h^2) snapped to
// zero so exactly-flat directions come out exactly zero.
Vec embed_second(const VectorField& f, const Vec& x, std::size_t i,
                 std::size_t j, double h0) {
    double hi = fd_step(x[i], h0);
    std::vector<Vec> evals;
    double denom;
    if (i == j) {
        Vec xp = x, xm = x;
        xp[i] += hi;
        xm[i] -= hi;
        evals = {f(xp), f(x), f(xm)};
        denom = hi * hi;
    } else {
        double hj = fd_step(x[j], h0);
        Vec xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += hi; xpp[j] += hj;
        xpm[i] += hi; xpm[j] -= hj;
        xmp[i] -= hi; xmp[j] += hj;
        xmm[i] -= hi; xmm[j] -= hj;
        evals = {f(xpp), f(xpm), f(xmp), f(xmm)};
        denom = 4.0 * hi * fd_step(x[j], h0);
    }
    double scale = 0.0;
    for (const Vec& e : evals)
        for (double v : e) scale = std::max(scale, std::fabs(v));
    double floor = 8.0 * 2.220446049250313e-16 * scale / denom;

    Vec out(evals[0].size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        double v;
        if (i == j)
            v = (evals[0][t] - 2.0 * evals[1][t] + evals[2][t]) / denom;
        else
            v = (evals[0][t] - evals[1][t] - evals[2][t] + evals[3][t]) / denom;
        if (!std::isfinite(v))
            throw NumericalError(
                "second_fundamental_form: non-finite second derivative");
        out[t] = std::fabs(v) <= floor ? 0.0 : v;
    }
    return out;
}

// Richardson-extrapolated central derivative of a Tensor3-valued function.
Tensor3 tensor3_partial_rich(const std::function<Tensor3(const Vec&)>& f,
                             const Vec& x, std::size_t k, double h0) {
    double h = fd_step(x[k], h0);
    auto at_step = [&](double hh) {
        Vec xp = x, xm = x;
        xp[k] += hh;
        xm[k] -= hh;
        Tensor3 p = f(xp);
        Tensor3 m = f(xm);
        for (std::size_t t = 0; t < p.raw().size(); ++t)
            p.raw()[t] = (p.raw()[t] - m.raw()[t]) / (2.0 * hh);
        return p;
    };
    Tensor3 dh = at_step(h);
    Tensor3 dh2 = at_step(h / 2.0);
    for (std::size_t t = 0; t < dh2.raw().size(); ++t) {
        dh2.raw()[t] = (4.0 * dh2.raw()[t] - dh.raw()[t]) / 3.0;
        if (!std::isfinite(dh2.raw()[t]))
            throw NumericalError("riemann: non-finite connection derivative");
    }
    return dh2;
}

} // namespace

Tensor3 levi_civita(const MetricField& g, const Vec& theta) {
    check_point(theta, g.dim, "levi_civita");
    std::size_t d = g.dim;
    Matrix G = eval_metric(g, theta);
    Matrix Ginv = inverse(G);  // SingularMetricError on degenerate g

    std::vector<Matrix> dg;
    dg.reserve(d);
    for (std::size_t k = 0; k < d; ++k)
        dg.push_back(finite_diff_partial_rich(g.eval, theta, k));

    Tensor3 out(d);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) {
                double v = 0.0;
                for (std::size_t l = 0; l < d; ++l)
                    v += Ginv(k, l) *
                         (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
                v *= 0.5;
                if (!std::isfinite(v))
                    throw NumericalError("levi_civita: non-finite coefficient");
                out(k, i, j) = v;
                out(k, j, i) = v;  // symmetric in the lower pair by formula
            }
    return out;
}

ConnectionField levi_civita_connection(const MetricField& g) {
    MetricField gc = g;
    return ConnectionField{
        g.dim, [gc](const Vec& theta) { return levi_civita(gc, theta); }};
}

Tensor3 torsion_of(const Tensor3& gamma) {
    std::size_t d = gamma.dim();
    Tensor3 T(d);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                T(k, i, j) = gamma(k, i, j) - gamma(k, j, i);
    return T;
}

Tensor3 torsion(const ConnectionField& gamma, const Vec& theta) {
    check_point(theta, gamma.dim, "torsion");
    return torsion_of(gamma.eval(theta));
}

Tensor4 riemann(const ConnectionField& gamma, const Vec& theta, double h0) {
    check_point(theta, gamma.dim, "riemann");
    std::size_t d = gamma.dim;
    Tensor3 G0 = gamma.eval(theta);
    for (double v : G0.raw())
        if (!std::isfinite(v))
            throw NumericalError("riemann: non-finite connection value");

    std::vector<Tensor3> dG;
    dG.reserve(d);
    for (std::size_t i = 0; i < d; ++i)
        dG.push_back(tensor3_partial_rich(gamma.eval, theta, i, h0));

    Tensor4 R(d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k) {
                    double v = dG[i](r, j, k) - dG[j](r, i, k);
                    for (std::size_t h = 0; h < d; ++h)
                        v += G0(r, i, h) * G0(h, j, k) -
                             G0(r, j, h) * G0(h, i, k);
                    R(r, i, j, k) = v;
                }
    return R;
}

namespace {

double scalar_from(const Matrix& Ginv, const Tensor4& R) {
    // Contract the upper index against the first lower index, then close
    // the remaining pair with the inverse metric. This slot pairing is the
    // one under which the unit round sphere comes out at +2.
    std::size_t d = Ginv.rows();
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double ric = 0.0;
            for (std::size_t k = 0; k < d; ++k) ric += R(k, k, i, j);
            s += Ginv(i, j) * ric;
        }
    return s;
}

} // namespace

double scalar_curvature(const MetricField& g, const Vec& theta) {
    check_point(theta, g.dim, "scalar_curvature");
    Matrix Ginv = inverse(eval_metric(g, theta));
    Tensor4 R = riemann(levi_civita_connection(g), theta);
    double s = scalar_from(Ginv, R);
    if (!std::isfinite(s))
        throw NumericalError("scalar_curvature: non-finite result");
    return s;
}

CurvatureReport curvature_report(const MetricField& g, const Vec& theta) {
    check_point(theta, g.dim, "curvature_report");
    ConnectionField lc = levi_civita_connection(g);
    CurvatureReport rep;
    rep.torsion = torsion(lc, theta);
    rep.riemann = riemann(lc, theta);
    rep.scalar = scalar_from(inverse(eval_metric(g, theta)), rep.riemann);
    return rep;
}

Tensor3 lower_connection(const Matrix& g, const Tensor3& gamma) {
    if (g.rows() != gamma.dim())
        throw ShapeError("lower_connection: dimension mismatch");
    std::size_t d = gamma.dim();
    Tensor3 low(d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            for (std::size_t c = 0; c < d; ++c) {
                double v = 0.0;
                for (std::size_t m = 0; m < d; ++m)
                    v += g(c, m) * gamma(m, a, b);
                low(a, b, c) = v;
            }
    return low;
}

Tensor3 dual_connection(const MetricField& g, const ConnectionField& gamma,
                        const Vec& theta) {
    if (g.dim != gamma.dim)
        throw ShapeError("dual_connection: metric and connection dimensions differ");
    check_point(theta, g.dim, "dual_connection");
    std::size_t d = g.dim;
    Matrix G = eval_metric(g, theta);
    Matrix Ginv = inverse(G);

    std::vector<Matrix> dg;
    dg.reserve(d);
    for (std::size_t k = 0; k < d; ++k)
        dg.push_back(finite_diff_partial_rich(g.eval, theta, k));

    Tensor3 low = lower_connection(G, gamma.eval(theta));
    // d_k g_ij = G_ki,j + G*_kj,i  =>  G*_kj,i = d_k g_ij - G_ki,j
    Tensor3 dual_low(d);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = 0; i < d; ++i)
                dual_low(k, j, i) = dg[k](i, j) - low(k, i, j);

    Tensor3 out(d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t j = 0; j < d; ++j) {
                double v = 0.0;
                for (std::size_t i = 0; i < d; ++i)
                    v += Ginv(r, i) * dual_low(k, j, i);
                out(r, k, j) = v;
            }
    return out;
}

ConnectionField dual_connection_field(const MetricField& g,
                                      const ConnectionField& gamma) {
    MetricField gc = g;
    ConnectionField gam = gamma;
    return ConnectionField{g.dim, [gc, gam](const Vec& theta) {
                               return dual_connection(gc, gam, theta);
                           }};
}

Tensor3 alpha_connection(const ConnectionField& nabla,
                         const ConnectionField& nabla_star, double alpha,
                         const Vec& theta) {
    if (nabla.dim != nabla_star.dim)
        throw ShapeError("alpha_connection: dimension mismatch");
    check_point(theta, nabla.dim, "alpha_connection");
    Tensor3 a = nabla.eval(theta);
    Tensor3 b = nabla_star.eval(theta);
    double ca = 0.5 * (1.0 - alpha), cb = 0.5 * (1.0 + alpha);
    Tensor3 out(nabla.dim);
    for (std::size_t t = 0; t < out.raw().size(); ++t)
        out.raw()[t] = ca * a.raw()[t] + cb * b.raw()[t];
    return out;
}

double volume_ratio(double scalar, std::size_t n, double r) {
    if (!(r > 0.0)) throw DomainError("volume_ratio: radius must be positive");
    if (n < 2) throw DomainError("volume_ratio: dimension must be at least 2");
    return 1.0 - scalar * r * r / (6.0 * double(n + 2));
}

Matrix induced_metric(const MetricField& g, const DropoutMask& mask,
                      const Vec& theta) {
    if (mask.size() != g.dim)
        throw ShapeError("induced_metric: mask length != metric dimension");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask.kept[i]) keep.push_back(i);
    if (keep.empty())
        throw EmptyMaskError("induced_metric: mask keeps no coordinates");
    Matrix G = eval_metric(g, theta);
    Matrix S(keep.size(), keep.size());
    for (std::size_t a = 0; a < keep.size(); ++a)
        for (std::size_t b = 0; b < keep.size(); ++b)
            S(a, b) = G(keep[a], keep[b]);
    return S;
}

SffResult second_fundamental_form(const EmbeddedFamily& fam, const Vec& theta) {
    check_point(theta, fam.param_dim, "second_fundamental_form");
    std::size_t m = fam.param_dim, n = fam.ambient_dim;

    Vec probe = fam.embed(theta);
    if (probe.size() != n)
        throw ShapeError("second_fundamental_form: embedding returned wrong length");

    // Jacobian columns by Richardson central differences
    Matrix J(n, m);
    for (std::size_t j = 0; j < m; ++j) {
        Vec col = finite_diff_partial_rich(fam.embed, theta, j);
        for (std::size_t a = 0; a < n; ++a) J(a, j) = col[a];
    }

    Matrix gram = matmul_tn(J, J);
    symmetrize(gram);
    SymEig ge = sym_eig(gram);
    double top = std::max(ge.eigenvalues.front(), 0.0);
    if (ge.eigenvalues.back() <= 1e-10 * std::max(top, 1e-30))
        throw DegenerateChartError(
            "second_fundamental_form: embedding Jacobian is rank-deficient");

    SffResult res;
    res.param_dim = m;
    res.ambient_dim = n;
    res.second.assign(m * m, Vec());

    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            Vec H = embed_second(fam.embed, theta, i, j, 1e-4);
            // subtract the tangential part: P H = J (J^T J)^{-1} J^T H
            Vec coeff = solve(gram, matvec_t(J, H));
            Vec PH = matvec(J, coeff);
            Vec L(n);
            for (std::size_t a = 0; a < n; ++a) L[a] = H[a] - PH[a];
            res.second[i * m + j] = L;
            res.second[j * m + i] = L;
        }

    // Size of the form in the metric-orthonormal frame: assemble the
    // per-ambient-coordinate matrices L^a, square and sum them, then
    // conjugate the square root by g^{-1/2} and take the Frobenius norm.
    Matrix S(m, m);
    for (std::size_t a = 0; a < n; ++a) {
        Matrix La(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) La(i, j) = res.at(i, j)[a];
        S = add(S, matmul(La, La));
    }
    symmetrize(S);
    Matrix gih = sym_inv_sqrt(gram);
    Matrix Mnorm = matmul(matmul(gih, sym_sqrt(S)), gih);
    res.norm = frobenius_norm(Mnorm);
    return res;
}

MetricField euclidean_metric(std::size_t dim) {
    return MetricField{dim, [dim](const Vec& theta) {
                           if (theta.size() != dim)
                               throw ShapeError("euclidean metric: bad point length");
                           return Matrix::identity(dim);
                       }};
}

MetricField gaussian_fisher_metric() {
    return MetricField{2, [](const Vec& theta) {
                           if (theta.size() != 2)
                               throw ShapeError("gaussian metric: bad point length");
                           double sigma = theta[1];
                           if (!(sigma > 0.0))
                               throw DomainError(
                                   "gaussian metric: sigma must be positive");
                           Matrix G(2, 2);
                           G(0, 0) = 1.0 / (sigma * sigma);
                           G(1, 1) = 2.0 / (sigma * sigma);
                           return G;
                       }};
}

MetricField sphere_metric() {
    return MetricField{2, [](const Vec& theta) {
                           if (theta.size() != 2)
                               throw ShapeError("sphere metric: bad point length");
                           double polar = theta[0];
                           if (!(polar > 0.0 && polar < 3.14159265358979323846))
                               throw DomainError(
                                   "sphere metric: polar angle must lie in (0, pi)");
                           Matrix G(2, 2);
                           G(0, 0) = 1.0;
                           double s = std::sin(polar);
                           G(1, 1) = s * s;
                           return G;
                       }};
}

} // namespace geodrop

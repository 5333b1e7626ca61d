#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "geodrop/eig.hpp"
#include "geodrop/geometry.hpp"
#include "geodrop/rng.hpp"

using namespace geodrop;

namespace {

Matrix random_symmetric(Rng& rng, std::size_t n) {
    Matrix A(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = rng.uniform(-1, 1);
            A(i, j) = v;
            A(j, i) = v;
        }
    return A;
}

// Smooth SPD metric field: fixed random orthogonal frame with positive
// trig-exponential eigenvalue profiles. Bounded, infinitely differentiable.
MetricField random_smooth_metric(Rng& rng, std::size_t dim) {
    Matrix Q = sym_eig(random_symmetric(rng, dim)).eigenvectors;
    Matrix C(dim, dim);
    Matrix P(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            C(i, j) = rng.uniform(-0.5, 0.5);
            P(i, j) = rng.uniform(0, 6.28);
        }
    auto eval = [dim, Q, C, P](const Vec& theta) {
        Matrix D(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) {
            double f = 0.0;
            for (std::size_t j = 0; j < dim; ++j)
                f += C(i, j) * std::sin(theta[j] + P(i, j));
            D(i, i) = std::exp(f);
        }
        Matrix G = matmul(matmul_tn(Q, D), transpose(Q));
        symmetrize(G);
        return G;
    };
    return MetricField{dim, eval};
}

// Smooth random connection field with trig-varying coefficients.
ConnectionField random_smooth_connection(Rng& rng, std::size_t dim) {
    Tensor3 base(dim), amp(dim);
    for (auto& v : base.raw()) v = rng.uniform(-0.5, 0.5);
    for (auto& v : amp.raw()) v = rng.uniform(-0.3, 0.3);
    auto eval = [dim, base, amp](const Vec& theta) {
        double s = 0.0;
        for (double t : theta) s += std::sin(t);
        Tensor3 out(dim);
        for (std::size_t t = 0; t < out.raw().size(); ++t)
            out.raw()[t] = base.raw()[t] + amp.raw()[t] * std::sin(s);
        return out;
    };
    return ConnectionField{dim, eval};
}

ConnectionField zero_connection(std::size_t dim) {
    return ConnectionField{dim, [dim](const Vec&) { return Tensor3(dim); }};
}

Vec random_point(Rng& rng, std::size_t dim) {
    Vec p(dim);
    for (auto& v : p) v = rng.uniform(-1.5, 1.5);
    return p;
}

} // namespace

TEST_CASE("levi_civita: Euclidean metric has vanishing coefficients") {
    for (std::size_t d : {2, 3, 5}) {
        Tensor3 g = levi_civita(euclidean_metric(d), Vec(d, 0.3));
        CHECK(g.max_abs() == 0.0);  // constant evaluator: differences are exact zeros
    }
}

TEST_CASE("levi_civita: location-scale family closed form") {
    // g = diag(1/s^2, 2/s^2): coefficient (mu, mu s) = -1/s
    Tensor3 g = levi_civita(gaussian_fisher_metric(), {0.0, 1.0});
    CHECK(g(0, 0, 1) == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(g(0, 1, 0) == doctest::Approx(-1.0).epsilon(1e-8));
    // remaining hand values: (mu,mu,mu)=0, (s,mu,mu)=1/(2s), (s,s,s)=-1/s
    CHECK(g(0, 0, 0) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(g(1, 0, 0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(g(1, 1, 1) == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("levi_civita: round sphere closed form") {
    Tensor3 g = levi_civita(sphere_metric(), {3.14159265358979323846 / 4.0, 0.2});
    CHECK(g(0, 1, 1) == doctest::Approx(-0.5).epsilon(1e-8));
    // (az, polar az) = cot(pi/4) = 1
    CHECK(g(1, 0, 1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("levi_civita is symmetric in the lower pair") {
    Rng rng(10);
    for (int rep = 0; rep < 5; ++rep) {
        MetricField g = random_smooth_metric(rng, 3);
        Tensor3 lc = levi_civita(g, random_point(rng, 3));
        CHECK(torsion_of(lc).max_abs() <= 1e-10);
    }
}

TEST_CASE("levi_civita rejects a singular metric") {
    MetricField bad{2, [](const Vec&) {
                        return Matrix::from_rows({{1.0, 1.0}, {1.0, 1.0}});
                    }};
    CHECK_THROWS_AS(levi_civita(bad, {0.0, 0.0}), SingularMetricError);
}

TEST_CASE("torsion: formula cases") {
    // zero and symmetric connections are torsion-free
    CHECK(torsion(zero_connection(3), Vec(3, 0.0)).max_abs() == 0.0);

    Tensor3 sym(2);
    sym(0, 0, 1) = 0.7;
    sym(0, 1, 0) = 0.7;
    ConnectionField symf{2, [sym](const Vec&) { return sym; }};
    CHECK(torsion(symf, {0, 0}).max_abs() == 0.0);

    // single asymmetric entry
    Tensor3 one(2);
    one(0, 0, 1) = 1.0;
    ConnectionField onef{2, [one](const Vec&) { return one; }};
    Tensor3 T = torsion(onef, {0, 0});
    CHECK(T(0, 0, 1) == 1.0);
    CHECK(T(0, 1, 0) == -1.0);
    CHECK(T(0, 0, 0) == 0.0);
}

TEST_CASE("riemann: flat connection gives exact zeros") {
    Tensor4 R = riemann(zero_connection(3), Vec(3, 0.5));
    CHECK(R.max_abs() == 0.0);
}

TEST_CASE("riemann: constant connection leaves only the quadratic terms") {
    // entries (0,0,1) = 2 and (1,1,0) = 3: the only surviving component is
    // R(0,0,1,0) = G(0,0,1) G(1,1,0) = 6, antisymmetric partner -6.
    Tensor3 c(2);
    c(0, 0, 1) = 2.0;
    c(1, 1, 0) = 3.0;
    ConnectionField cf{2, [c](const Vec&) { return c; }};
    Tensor4 R = riemann(cf, {0.1, -0.4});
    CHECK(R(0, 0, 1, 0) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(R(0, 1, 0, 0) == doctest::Approx(-6.0).epsilon(1e-12));
    CHECK(R(1, 0, 1, 0) == doctest::Approx(0.0));
    CHECK(R(0, 0, 1, 1) == doctest::Approx(0.0));
}

TEST_CASE("riemann: round sphere closed form") {
    double polar = 3.14159265358979323846 / 3.0;
    double want = std::sin(polar) * std::sin(polar);  // 0.75
    Tensor4 R = riemann(levi_civita_connection(sphere_metric()), {polar, 1.0});
    // Component formula puts sin^2 at (upper=polar, lower=(polar,az,az));
    // the (az, polar) ordering of the middle pair carries the minus sign.
    CHECK(R(0, 0, 1, 1) == doctest::Approx(want).epsilon(1e-4));
    CHECK(R(0, 1, 0, 1) == doctest::Approx(-want).epsilon(1e-4));
    CHECK(want == doctest::Approx(0.75));
}

TEST_CASE("scalar_curvature: flat, spherical, hyperbolic anchors") {
    CHECK(scalar_curvature(euclidean_metric(2), {0.7, -0.3}) == 0.0);
    CHECK(scalar_curvature(euclidean_metric(4), Vec(4, 1.0)) == 0.0);

    double sph = scalar_curvature(sphere_metric(),
                                  {3.14159265358979323846 / 4.0, 0.0});
    CHECK(sph == doctest::Approx(2.0).epsilon(1e-3));

    double gauss = scalar_curvature(gaussian_fisher_metric(), {0.0, 1.0});
    CHECK(gauss == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("scalar_curvature of the location-scale metric is constant") {
    Rng rng(77);
    for (int rep = 0; rep < 20; ++rep) {
        Vec p = {rng.uniform(-2, 2), rng.uniform(0.5, 3.0)};
        double s = scalar_curvature(gaussian_fisher_metric(), p);
        CHECK(std::fabs(s - (-1.0)) <= 2e-3);
    }
}

TEST_CASE("curvature_report bundles consistent pieces") {
    CurvatureReport rep =
        curvature_report(sphere_metric(), {3.14159265358979323846 / 4.0, 0.0});
    CHECK(rep.torsion.max_abs() <= 1e-10);
    CHECK(rep.scalar == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(rep.riemann(0, 0, 1, 1) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("dual_connection: trivial and closed-form cases") {
    // constant metric, zero connection: dual vanishes
    Tensor3 d0 = dual_connection(euclidean_metric(3), zero_connection(3),
                                 Vec(3, 0.2));
    CHECK(d0.max_abs() <= 1e-12);

    // location-scale metric, zero input connection: lowered dual entry
    // (s s, s) equals d_s g_ss = -4/s^3 = -4 at s = 1
    MetricField g = gaussian_fisher_metric();
    Tensor3 dual = dual_connection(g, zero_connection(2), {0.0, 1.0});
    Tensor3 low = lower_connection(g.eval({0.0, 1.0}), dual);
    CHECK(low(1, 1, 1) == doctest::Approx(-4.0).epsilon(1e-8));
}

TEST_CASE("dual_connection: the Levi-Civita connection is self-dual") {
    Rng rng(31);
    for (int rep = 0; rep < 5; ++rep) {
        MetricField g = random_smooth_metric(rng, 3);
        Vec p = random_point(rng, 3);
        Tensor3 lc = levi_civita(g, p);
        Tensor3 dual = dual_connection(g, levi_civita_connection(g), p);
        double gap = 0.0;
        for (std::size_t t = 0; t < lc.raw().size(); ++t)
            gap = std::max(gap, std::fabs(lc.raw()[t] - dual.raw()[t]));
        CHECK(gap <= 1e-8);
    }
}

TEST_CASE("duality residual with an independent derivative estimate") {
    // residual(k,i,j) = d_k g_ij - G_ki,j - G*_kj,i must vanish; probe the
    // metric derivative with a plain central difference at a different step
    // so the check is not a tautology.
    Rng rng(202);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t dim = 2 + rng.below(2);
        MetricField g = random_smooth_metric(rng, dim);
        ConnectionField gam = random_smooth_connection(rng, dim);
        Vec p = random_point(rng, dim);

        Matrix G = g.eval(p);
        Tensor3 low = lower_connection(G, gam.eval(p));
        Tensor3 dual_low = lower_connection(G, dual_connection(g, gam, p));

        for (std::size_t k = 0; k < dim; ++k) {
            Matrix dgk = finite_diff_partial(g.eval, p, k, 1e-6);
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j) {
                    double r = dgk(i, j) - low(k, i, j) - dual_low(k, j, i);
                    worst = std::max(worst, std::fabs(r));
                }
        }
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("alpha_connection endpoints and midpoint") {
    Rng rng(404);
    ConnectionField nab = random_smooth_connection(rng, 2);
    ConnectionField star = random_smooth_connection(rng, 2);
    Vec p = {0.3, -0.7};
    Tensor3 n0 = nab.eval(p), s0 = star.eval(p);

    Tensor3 am = alpha_connection(nab, star, -1.0, p);
    Tensor3 ap = alpha_connection(nab, star, 1.0, p);
    for (std::size_t t = 0; t < n0.raw().size(); ++t) {
        CHECK(am.raw()[t] == n0.raw()[t]);
        CHECK(ap.raw()[t] == s0.raw()[t]);
    }

    Tensor3 two(2);
    two(1, 0, 1) = 2.0;
    ConnectionField twof{2, [two](const Vec&) { return two; }};
    Tensor3 mid = alpha_connection(zero_connection(2), twof, 0.0, p);
    CHECK(mid(1, 0, 1) == 1.0);

    ConnectionField bad = random_smooth_connection(rng, 3);
    CHECK_THROWS_AS(alpha_connection(nab, bad, 0.0, p), ShapeError);
}

TEST_CASE("alpha_connection duality: dual of the alpha family flips alpha") {
    Rng rng(505);
    for (int rep = 0; rep < 4; ++rep) {
        MetricField g = random_smooth_metric(rng, 2);
        ConnectionField nab = random_smooth_connection(rng, 2);
        ConnectionField star = dual_connection_field(g, nab);
        Vec p = random_point(rng, 2);
        for (double alpha : {-0.7, 0.0, 0.4, 1.0}) {
            ConnectionField mix{
                2, [&, alpha](const Vec& q) {
                    return alpha_connection(nab, star, alpha, q);
                }};
            Tensor3 lhs = dual_connection(g, mix, p);
            Tensor3 rhs = alpha_connection(nab, star, -alpha, p);
            double gap = 0.0;
            for (std::size_t t = 0; t < lhs.raw().size(); ++t)
                gap = std::max(gap, std::fabs(lhs.raw()[t] - rhs.raw()[t]));
            CHECK(gap <= 1e-6);
        }
    }
}

TEST_CASE("volume_ratio formula") {
    CHECK(volume_ratio(0.0, 3, 0.5) == 1.0);
    CHECK(volume_ratio(2.0, 2, 0.1) ==
          doctest::Approx(1.0 - 2.0 * 0.01 / 24.0).epsilon(1e-15));
    CHECK(volume_ratio(-1.0, 2, 0.3) > 1.0);
    CHECK_THROWS_AS(volume_ratio(1.0, 2, 0.0), DomainError);
    CHECK_THROWS_AS(volume_ratio(1.0, 1, 0.1), DomainError);
}

TEST_CASE("induced_metric selects the kept block") {
    MetricField g{3, [](const Vec&) { return Matrix::diag({1, 2, 3}); }};
    Vec p(3, 0.0);

    Matrix full = induced_metric(g, DropoutMask::all_kept(3), p);
    CHECK(frobenius_norm(sub(full, Matrix::diag({1, 2, 3}))) == 0.0);

    DropoutMask keep13{{1, 0, 1}};
    Matrix s = induced_metric(g, keep13, p);
    CHECK(s.rows() == 2);
    CHECK(s(0, 0) == 1.0);
    CHECK(s(1, 1) == 3.0);
    CHECK(s(0, 1) == 0.0);

    CHECK_THROWS_AS(induced_metric(g, DropoutMask{{0, 0, 0}}, p), EmptyMaskError);
    CHECK_THROWS_AS(induced_metric(g, DropoutMask{{1, 1}}, p), ShapeError);
}

TEST_CASE("second_fundamental_form: linear embedding is flat") {
    EmbeddedFamily lin{2, 3, [](const Vec& t) {
                           return Vec{t[0] + 2 * t[1], 3 * t[0], t[1] - t[0]};
                       }};
    SffResult r = second_fundamental_form(lin, {0.4, -0.2});
    CHECK(r.norm == 0.0);
    for (const auto& L : r.second)
        for (double v : L) CHECK(v == 0.0);
}

TEST_CASE("second_fundamental_form: parabola fixture") {
    EmbeddedFamily par{1, 2, [](const Vec& t) {
                           return Vec{t[0], t[0] * t[0]};
                       }};
    SffResult r = second_fundamental_form(par, {0.0});
    CHECK(r.at(0, 0)[0] == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(r.at(0, 0)[1] == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(r.norm == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("second_fundamental_form: unit circle has norm 1 everywhere") {
    EmbeddedFamily circ{1, 2, [](const Vec& t) {
                            return Vec{std::cos(t[0]), std::sin(t[0])};
                        }};
    for (double t : {0.0, 0.9, 2.2, -1.3})
        CHECK(second_fundamental_form(circ, {t}).norm ==
              doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("second_fundamental_form: invariant under ambient rotation") {
    Rng rng(606);
    EmbeddedFamily fam{2, 3, [](const Vec& t) {
                           return Vec{t[0], t[1],
                                      t[0] * t[0] + 0.5 * t[0] * t[1]};
                       }};
    Matrix Q = sym_eig(random_symmetric(rng, 3)).eigenvectors;
    EmbeddedFamily rot{2, 3, [Q, &fam](const Vec& t) {
                           return matvec(Q, fam.embed(t));
                       }};
    Vec p = {0.3, -0.6};
    double a = second_fundamental_form(fam, p).norm;
    double b = second_fundamental_form(rot, p).norm;
    CHECK(std::fabs(a - b) <= 1e-8);
}

TEST_CASE("second_fundamental_form rejects rank-deficient charts") {
    EmbeddedFamily dup{2, 2, [](const Vec& t) {
                           return Vec{t[0] + t[1], 2 * (t[0] + t[1])};
                       }};
    CHECK_THROWS_AS(second_fundamental_form(dup, {0.1, 0.2}),
                    DegenerateChartError);
}

TEST_CASE("built-in metric domains") {
    CHECK_THROWS_AS(gaussian_fisher_metric().eval({0.0, -1.0}), DomainError);
    CHECK_THROWS_AS(sphere_metric().eval({0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(sphere_metric().eval({3.2, 0.0}), DomainError);
}

#include "geodrop/fim.hpp"

#include <algorithm>
#include <cmath>

#include "geodrop/eig.hpp"
#include "geodrop/finite_diff.hpp"
#include "geodrop/simd.hpp"

namespace geodrop {

namespace {

constexpr std::size_t kDenseCap = 2000;

void check_inputs(const MlpModel& m, const Matrix& X) {
    if (m.params.size() != m.param_count())
        throw ShapeError("model parameter vector has wrong length");
    if (X.rows() == 0) throw ShapeError("fim: empty input set");
    if (X.cols() != m.in_dim()) throw ShapeError("fim: input width != model input");
}

// Scatter sample i's per-layer z-gradients into one flat parameter-gradient
// row: dW_l = g_l a_{l-1}^T, db_l = g_l.
void flat_grad_row(const MlpModel& m, const ForwardTrace& tr,
                   const std::vector<Matrix>& zg, std::size_t i, double* row) {
    for (std::size_t l = 0; l < m.depth(); ++l) {
        const double* a = tr.layer_inputs[l].row(i);
        const double* g = zg[l].row(i);
        std::size_t in_w = m.layer_in(l), out_w = m.layer_out(l);
        double* w = row + m.weight_offset(l);
        for (std::size_t u = 0; u < out_w; ++u)
            simd::axpy(g[u], a, w + u * in_w, in_w);
        double* b = row + m.bias_offset(l);
        for (std::size_t u = 0; u < out_w; ++u) b[u] = g[u];
    }
}

int draw_class(const double* probs, std::size_t k, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t y = 0; y + 1 < k; ++y) {
        acc += probs[y];
        if (u < acc) return int(y);
    }
    return int(k - 1);
}

}  // namespace

void check_psd(const FimEstimate& est) {
    auto one = [](const Matrix& M, const char* what) {
        if (!is_symmetric(M, 1e-8))
            throw NumericalError(std::string(what) + ": not symmetric");
        SymEig e = sym_eig(M);
        double floor = -1e-8 * std::max(trace(M), 0.0);
        if (e.eigenvalues.back() < floor)
            throw NumericalError(std::string(what) + ": negative eigenvalue " +
                                 std::to_string(e.eigenvalues.back()));
    };
    if (est.kind == FimKind::kfac) {
        for (auto& [A, G] : est.kfac_blocks) {
            one(A, "kfac A block");
            one(G, "kfac G block");
        }
    } else {
        one(est.full, "fim matrix");
    }
}

FimEstimate exact_fim(const MlpModel& m, const Matrix& X) {
    check_inputs(m, X);
    std::size_t P = m.param_count();
    if (P > kDenseCap)
        throw CapacityError("exact_fim: " + std::to_string(P) +
                            " parameters exceeds the dense cap of 2000");
    std::size_t N = X.rows(), K = m.n_classes();
    ForwardTrace tr = trace_forward(m, X);
    Matrix F(P, P);
    Matrix Gm(N, P);
    std::vector<int> labels(N);
    for (std::size_t y = 0; y < K; ++y) {
        std::fill(labels.begin(), labels.end(), int(y));
        std::vector<Matrix> zg = trace_zgrads(m, tr, labels);
        Gm.fill(0.0);
        for (std::size_t i = 0; i < N; ++i) {
            flat_grad_row(m, tr, zg, i, Gm.row(i));
            simd::scal(std::sqrt(tr.probs(i, y)), Gm.row(i), P);
        }
        simd::gemm_tn(Gm.data(), Gm.data(), F.data(), P, P, N);
    }
    simd::scal(1.0 / double(N), F.data(), F.size());
    symmetrize(F);
    FimEstimate est;
    est.kind = FimKind::exact;
    est.full = std::move(F);
    est.n_samples = N;
    return est;
}

FimEstimate mc_fim(const MlpModel& m, const Matrix& X, std::size_t samples_per_input,
                   Rng& rng) {
    check_inputs(m, X);
    if (samples_per_input == 0)
        throw ConfigError("mc_fim: samples_per_input must be >= 1");
    std::size_t P = m.param_count();
    if (P > kDenseCap)
        throw CapacityError("mc_fim: " + std::to_string(P) +
                            " parameters exceeds the dense cap of 2000");
    std::size_t N = X.rows(), K = m.n_classes();
    ForwardTrace tr = trace_forward(m, X);
    Matrix F(P, P);
    Matrix Gm(N, P);
    std::vector<int> labels(N);
    double row_scale = 1.0 / std::sqrt(double(N) * double(samples_per_input));
    for (std::size_t s = 0; s < samples_per_input; ++s) {
        for (std::size_t i = 0; i < N; ++i)
            labels[i] = draw_class(tr.probs.row(i), K, rng);
        std::vector<Matrix> zg = trace_zgrads(m, tr, labels);
        Gm.fill(0.0);
        for (std::size_t i = 0; i < N; ++i) {
            flat_grad_row(m, tr, zg, i, Gm.row(i));
            simd::scal(row_scale, Gm.row(i), P);
        }
        simd::gemm_tn(Gm.data(), Gm.data(), F.data(), P, P, N);
    }
    symmetrize(F);
    FimEstimate est;
    est.kind = FimKind::monte_carlo;
    est.full = std::move(F);
    est.n_samples = N * samples_per_input;
    return est;
}

FimEstimate kfac_fim(const MlpModel& m, const Matrix& X) {
    check_inputs(m, X);
    std::size_t N = X.rows(), K = m.n_classes();
    ForwardTrace tr = trace_forward(m, X);
    FimEstimate est;
    est.kind = FimKind::kfac;
    est.n_samples = N;
    est.kfac_blocks.reserve(m.depth());
    double inv_n = 1.0 / double(N);
    for (std::size_t l = 0; l < m.depth(); ++l) {
        std::size_t in_w = m.layer_in(l);
        Matrix aug(N, in_w + 1);
        for (std::size_t i = 0; i < N; ++i) {
            std::copy(tr.layer_inputs[l].row(i), tr.layer_inputs[l].row(i) + in_w,
                      aug.row(i));
            aug(i, in_w) = 1.0;
        }
        Matrix A(in_w + 1, in_w + 1);
        simd::gemm_tn(aug.data(), aug.data(), A.data(), in_w + 1, in_w + 1, N);
        simd::scal(inv_n, A.data(), A.size());
        symmetrize(A);
        est.kfac_blocks.emplace_back(std::move(A), Matrix(m.layer_out(l), m.layer_out(l)));
    }
    std::vector<int> labels(N);
    for (std::size_t y = 0; y < K; ++y) {
        std::fill(labels.begin(), labels.end(), int(y));
        std::vector<Matrix> zg = trace_zgrads(m, tr, labels);
        for (std::size_t l = 0; l < m.depth(); ++l) {
            std::size_t out_w = m.layer_out(l);
            for (std::size_t i = 0; i < N; ++i)
                simd::scal(std::sqrt(tr.probs(i, y)), zg[l].row(i), out_w);
            simd::gemm_tn(zg[l].data(), zg[l].data(),
                          est.kfac_blocks[l].second.data(), out_w, out_w, N);
        }
    }
    for (auto& [A, G] : est.kfac_blocks) {
        simd::scal(inv_n, G.data(), G.size());
        symmetrize(G);
    }
    return est;
}

std::size_t fim_dim(const FimEstimate& est) {
    if (est.kind != FimKind::kfac) return est.full.rows();
    std::size_t p = 0;
    for (auto& [A, G] : est.kfac_blocks) p += A.rows() * G.rows();  // (in+1)*out
    return p;
}

Matrix materialize(const FimEstimate& est) {
    if (est.kind != FimKind::kfac) return est.full;
    std::size_t P = fim_dim(est);
    if (P > kDenseCap)
        throw CapacityError("materialize: " + std::to_string(P) +
                            " parameters exceeds the dense cap of 2000");
    Matrix F(P, P);
    std::size_t off = 0;
    for (auto& [A, G] : est.kfac_blocks) {
        std::size_t in_w = A.rows() - 1, out_w = G.rows();
        std::size_t woff = off, boff = off + out_w * in_w;
        auto pos = [&](std::size_t u, std::size_t j) {
            return j < in_w ? woff + u * in_w + j : boff + u;
        };
        for (std::size_t u = 0; u < out_w; ++u)
            for (std::size_t j = 0; j <= in_w; ++j)
                for (std::size_t v = 0; v < out_w; ++v)
                    for (std::size_t k = 0; k <= in_w; ++k)
                        F(pos(u, j), pos(v, k)) = G(u, v) * A(j, k);
        off += out_w * (in_w + 1);
    }
    return F;
}

FimNorm fim_norm_from_name(const std::string& name) {
    if (name == "frobenius") return FimNorm::frobenius;
    if (name == "trace") return FimNorm::trace;
    if (name == "spectral") return FimNorm::spectral;
    throw ConfigError("unknown norm '" + name +
                      "' (expected frobenius, trace or spectral)");
}

const char* fim_norm_name(FimNorm which) {
    switch (which) {
        case FimNorm::frobenius: return "frobenius";
        case FimNorm::trace: return "trace";
        default: return "spectral";
    }
}

double fim_norm(const FimEstimate& est, FimNorm which) {
    if (est.kind == FimKind::kfac) {
        double acc = 0.0;
        for (auto& [A, G] : est.kfac_blocks) {
            switch (which) {
                case FimNorm::frobenius: {
                    double f = frobenius_norm(A) * frobenius_norm(G);
                    acc += f * f;
                    break;
                }
                case FimNorm::trace:
                    acc += trace(A) * trace(G);
                    break;
                case FimNorm::spectral:
                    acc = std::max(acc, max_eigenvalue(A) * max_eigenvalue(G));
                    break;
            }
        }
        return which == FimNorm::frobenius ? std::sqrt(acc) : acc;
    }
    switch (which) {
        case FimNorm::frobenius: return frobenius_norm(est.full);
        case FimNorm::trace: return trace(est.full);
        default: return max_eigenvalue(est.full);
    }
}

void PhiRegularizer::validate() const {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw DomainError("phi: mu must be >= 0");
    if (kind == PhiKind::pac_bayes) {
        if (!(lambda > 0.0)) throw DomainError("phi: lambda must be > 0");
        if (!(eps > 0.0)) throw DomainError("phi: eps must be > 0");
        if (n < 1) throw DomainError("phi: n must be >= 1");
        if (!(C >= 0.0)) throw DomainError("phi: C must be >= 0");
    }
}

namespace {

// delta^T I delta without materializing a kfac estimate: per block, reshape
// the displacement into D (out x in+1) and take sum(G .* (D A D^T)).
double quadratic_form(const FimEstimate& est, const Vec& delta) {
    if (delta.size() != fim_dim(est))
        throw ShapeError("phi: displacement length != estimate dimension");
    if (est.kind != FimKind::kfac) {
        return dot(delta, matvec(est.full, delta));
    }
    double acc = 0.0;
    std::size_t off = 0;
    for (auto& [A, G] : est.kfac_blocks) {
        std::size_t in_w = A.rows() - 1, out_w = G.rows();
        Matrix D(out_w, in_w + 1);
        for (std::size_t u = 0; u < out_w; ++u) {
            std::copy(delta.begin() + long(off + u * in_w),
                      delta.begin() + long(off + (u + 1) * in_w), D.row(u));
            D(u, in_w) = delta[off + out_w * in_w + u];
        }
        Matrix DA = matmul(D, A);
        Matrix Q = matmul_nt(DA, D);  // D A D^T, out x out
        for (std::size_t u = 0; u < out_w; ++u)
            acc += simd::dot(G.row(u), Q.row(u), out_w);
        off += out_w * (in_w + 1);
    }
    return acc;
}

}  // namespace

double phi_value(const PhiRegularizer& reg, const FimEstimate& est, const Vec& theta) {
    (void)theta;
    reg.validate();
    switch (reg.kind) {
        case PhiKind::fim_norm:
            return reg.mu * fim_norm(est, reg.norm);
        case PhiKind::distill:
            return quadratic_form(est, reg.delta);
        default: {
            double dkl = quadratic_form(est, reg.delta);
            double arg = (dkl + 1.0 / reg.eps) / reg.lambda;
            if (!(arg > 0.0))
                throw DomainError("phi: nonpositive log argument in pac_bayes");
            return reg.lambda * reg.lambda * reg.C / (8.0 * double(reg.n)) +
                   std::log(arg);
        }
    }
}

TrainResult train_with_phi(const MlpModel& proto, const Dataset& data,
                           const PhiRegularizer& reg, const TrainConfig& cfg) {
    cfg.validate();
    reg.validate();
    data.validate();
    TrainConfig inner = cfg;
    bool active = !(reg.kind == PhiKind::fim_norm && reg.mu == 0.0);
    if (active) {
        if (proto.param_count() > 200)
            throw CapacityError("train_with_phi: finite-difference penalty path is "
                                "gated at 200 parameters");
        Dataset mini = data.slice(0, std::min(cfg.batch_size, data.size()));
        MlpModel probe = proto;
        auto phi_at = [reg, mini, probe](const Vec& theta) mutable {
            probe.params = theta;
            FimEstimate est = exact_fim(probe, mini.features);
            return phi_value(reg, est, theta);
        };
        inner.regularizer = [phi_at](const Vec& theta, Vec& grad) mutable {
            Vec g = finite_diff_grad(phi_at, theta, 1e-5);
            axpy(1.0, g, grad);
            return phi_at(theta);
        };
    }
    return train_projection(proto, data, DropoutMask::all_kept(proto.param_count()),
                            inner);
}

}  // namespace geodrop

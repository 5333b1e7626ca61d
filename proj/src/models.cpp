#include "geodrop/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "geodrop/simd.hpp"

namespace geodrop {

const char* activation_name(Activation a) {
    return a == Activation::sigmoid ? "sigmoid" : "relu";
}

Activation activation_from_name(const std::string& name) {
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "relu") return Activation::relu;
    throw ConfigError("unknown activation '" + name + "' (expected sigmoid or relu)");
}

// ---------------------------------------------------------------------------
// layout
// ---------------------------------------------------------------------------

std::size_t MlpModel::weight_offset(std::size_t l) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < l; ++i) off += sizes[i + 1] * (sizes[i] + 1);
    return off;
}

std::size_t MlpModel::bias_offset(std::size_t l) const {
    return weight_offset(l) + sizes[l + 1] * sizes[l];
}

std::size_t MlpModel::param_count() const {
    return weight_offset(depth());
}

static void check_arch(const std::vector<std::size_t>& sizes) {
    if (sizes.size() < 2) throw ShapeError("mlp needs at least input and output widths");
    for (std::size_t s : sizes)
        if (s == 0) throw ShapeError("mlp layer width must be positive");
}

MlpModel make_mlp_zero(const std::vector<std::size_t>& sizes, Activation act) {
    check_arch(sizes);
    MlpModel m;
    m.sizes = sizes;
    m.act = act;
    m.params.assign(m.param_count(), 0.0);
    return m;
}

MlpModel make_mlp(const std::vector<std::size_t>& sizes, Activation act, Rng& rng) {
    MlpModel m = make_mlp_zero(sizes, act);
    // Glorot-style uniform init on weights, zero biases. Draw order is part
    // of the determinism contract: weights in layer order, row-major, biases
    // consume no draws.
    for (std::size_t l = 0; l < m.depth(); ++l) {
        double s = std::sqrt(6.0 / double(m.layer_in(l) + m.layer_out(l)));
        double* w = m.params.data() + m.weight_offset(l);
        std::size_t nw = m.layer_out(l) * m.layer_in(l);
        for (std::size_t i = 0; i < nw; ++i) w[i] = rng.uniform(-s, s);
    }
    return m;
}

// ---------------------------------------------------------------------------
// dataset
// ---------------------------------------------------------------------------

void Dataset::validate() const {
    if (features.rows() != labels.size())
        throw ShapeError("dataset: feature rows != label count");
    if (n_classes < 2) throw DomainError("dataset: need at least 2 classes");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || std::size_t(labels[i]) >= n_classes)
            throw DomainError("dataset: label out of range at index " + std::to_string(i));
    check_finite(features, "dataset features");
}

Dataset Dataset::slice(std::size_t offset, std::size_t count) const {
    if (offset + count > size()) throw ShapeError("dataset slice out of range");
    Dataset out;
    out.n_classes = n_classes;
    out.features = Matrix(count, dim());
    out.labels.assign(labels.begin() + long(offset), labels.begin() + long(offset + count));
    std::memcpy(out.features.data(), features.row(offset), count * dim() * sizeof(double));
    return out;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (epochs == 0) throw ConfigError("epochs must be >= 1");
    if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ConfigError("l2 must be >= 0");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw ConfigError("dropout_rate must be in [0,1)");
}

// ---------------------------------------------------------------------------
// forward / backward core
// ---------------------------------------------------------------------------

namespace {

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

inline double softplus(double z) {  // log(1 + e^z), overflow-safe
    return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

// Z = A * W^T + 1 b^T for one layer; W is out x in, row-major inside theta.
Matrix affine(const Matrix& A, const double* theta, const MlpModel& m, std::size_t l) {
    std::size_t out = m.layer_out(l), in = m.layer_in(l);
    Matrix Z(A.rows(), out);
    const double* b = theta + m.bias_offset(l);
    for (std::size_t r = 0; r < Z.rows(); ++r)
        std::memcpy(Z.row(r), b, out * sizeof(double));
    simd::gemm_nt(A.data(), theta + m.weight_offset(l), Z.data(), A.rows(), out, in);
    return Z;
}

// Per-hidden-layer column scales used by stochastic dropout: entry 0 for a
// dropped unit, 1/(1-p) for a kept one. Empty vector = no dropout.
using UnitScales = std::vector<Vec>;

struct Cache {
    std::vector<Matrix> raw;  // post-activation per hidden layer (pre-scale)
    std::vector<Matrix> in;   // actual input fed to the next layer
    Matrix logits;            // N x out_dim
};

void forward_core(const MlpModel& m, const double* theta, const Matrix& X,
                  const UnitScales* scales, Cache& c) {
    if (X.cols() != m.in_dim()) throw ShapeError("forward: input width != model input");
    c.raw.clear();
    c.in.clear();
    const Matrix* cur = &X;
    for (std::size_t l = 0; l < m.depth(); ++l) {
        Matrix Z = affine(*cur, theta, m, l);
        if (l + 1 == m.depth()) {
            c.logits = std::move(Z);
            return;
        }
        double* z = Z.data();
        std::size_t nz = Z.size();
        if (m.act == Activation::sigmoid)
            for (std::size_t i = 0; i < nz; ++i) z[i] = sigmoid(z[i]);
        else
            for (std::size_t i = 0; i < nz; ++i) z[i] = z[i] > 0.0 ? z[i] : 0.0;
        c.raw.push_back(std::move(Z));
        if (scales && !(*scales)[l].empty()) {
            Matrix S = c.raw.back();
            const Vec& s = (*scales)[l];
            for (std::size_t r = 0; r < S.rows(); ++r) {
                double* row = S.row(r);
                for (std::size_t u = 0; u < S.cols(); ++u) row[u] *= s[u];
            }
            c.in.push_back(std::move(S));
        } else {
            c.in.push_back(c.raw.back());
        }
        cur = &c.in.back();
    }
}

Matrix probs_from_logits(const MlpModel& m, const Matrix& Z) {
    std::size_t N = Z.rows();
    Matrix P(N, m.n_classes());
    if (m.out_dim() == 1) {
        for (std::size_t i = 0; i < N; ++i) {
            double p = sigmoid(Z(i, 0));
            P(i, 0) = p;
            P(i, 1) = 1.0 - p;
        }
        return P;
    }
    for (std::size_t i = 0; i < N; ++i) {
        const double* z = Z.row(i);
        double mx = z[0];
        for (std::size_t j = 1; j < Z.cols(); ++j) mx = std::max(mx, z[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < Z.cols(); ++j) {
            P(i, j) = std::exp(z[j] - mx);
            sum += P(i, j);
        }
        for (std::size_t j = 0; j < Z.cols(); ++j) P(i, j) /= sum;
    }
    return P;
}

// Mean cross-entropy from logits (numerically stable in saturated regimes).
double mean_ce(const MlpModel& m, const Matrix& Z, const std::vector<int>& labels) {
    if (Z.rows() != labels.size()) throw ShapeError("loss: batch size != label count");
    double total = 0.0;
    if (m.out_dim() == 1) {
        for (std::size_t i = 0; i < Z.rows(); ++i) {
            double z = Z(i, 0);  // logit of class 0
            total += labels[i] == 0 ? softplus(-z) : softplus(z);
        }
        return total / double(Z.rows());
    }
    for (std::size_t i = 0; i < Z.rows(); ++i) {
        const double* z = Z.row(i);
        double mx = z[0];
        for (std::size_t j = 1; j < Z.cols(); ++j) mx = std::max(mx, z[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < Z.cols(); ++j) sum += std::exp(z[j] - mx);
        total += mx + std::log(sum) - z[std::size_t(labels[i])];
    }
    return total / double(Z.rows());
}

// d(mean CE)/d(logits)
Matrix logit_grad(const MlpModel& m, const Matrix& Z, const std::vector<int>& labels) {
    Matrix P = probs_from_logits(m, Z);
    std::size_t N = Z.rows();
    double inv = 1.0 / double(N);
    if (m.out_dim() == 1) {
        Matrix D(N, 1);
        for (std::size_t i = 0; i < N; ++i)
            D(i, 0) = (P(i, 0) - (labels[i] == 0 ? 1.0 : 0.0)) * inv;
        return D;
    }
    for (std::size_t i = 0; i < N; ++i) {
        P(i, std::size_t(labels[i])) -= 1.0;
        simd::scal(inv, P.row(i), P.cols());
    }
    return P;
}

void check_labels(const MlpModel& m, const std::vector<int>& labels) {
    for (int y : labels)
        if (y < 0 || std::size_t(y) >= m.n_classes())
            throw DomainError("label out of range for model output");
}

// Backprop for mean CE. Returns (loss, grad over the flat parameter vector).
LossGrad backprop(const MlpModel& m, const double* theta, const Matrix& X,
                  const std::vector<int>& labels, const UnitScales* scales) {
    Cache c;
    forward_core(m, theta, X, scales, c);
    LossGrad out;
    out.loss = mean_ce(m, c.logits, labels);
    out.grad.assign(m.param_count(), 0.0);
    Matrix D = logit_grad(m, c.logits, labels);
    std::size_t N = X.rows();
    for (std::size_t l = m.depth(); l-- > 0;) {
        const Matrix& A_prev = l == 0 ? X : c.in[l - 1];
        std::size_t out_w = m.layer_out(l), in_w = m.layer_in(l);
        // dW += D^T A_prev, db += column sums of D
        simd::gemm_tn(D.data(), A_prev.data(), out.grad.data() + m.weight_offset(l),
                      out_w, in_w, N);
        double* db = out.grad.data() + m.bias_offset(l);
        for (std::size_t i = 0; i < N; ++i) simd::axpy(1.0, D.row(i), db, out_w);
        if (l == 0) break;
        Matrix dA(N, in_w);
        simd::gemm_nn(D.data(), theta + m.weight_offset(l), dA.data(), N, in_w, out_w);
        const Matrix& raw = c.raw[l - 1];
        const Vec* s = (scales && !(*scales)[l - 1].empty()) ? &(*scales)[l - 1] : nullptr;
        for (std::size_t i = 0; i < N; ++i) {
            double* d = dA.row(i);
            const double* a = raw.row(i);
            for (std::size_t u = 0; u < in_w; ++u) {
                double g = s ? d[u] * (*s)[u] : d[u];
                d[u] = m.act == Activation::sigmoid ? g * a[u] * (1.0 - a[u])
                                                    : (a[u] > 0.0 ? g : 0.0);
            }
        }
        D = std::move(dA);
    }
    return out;
}

void check_mask(const MlpModel& m, const DropoutMask& mask) {
    if (mask.size() != m.param_count())
        throw ShapeError("mask length != model parameter count");
}

Vec masked_params(const MlpModel& m, const DropoutMask& mask) {
    check_mask(m, mask);
    Vec theta = m.params;
    for (std::size_t i = 0; i < theta.size(); ++i)
        if (!mask.kept[i]) theta[i] = 0.0;
    return theta;
}

void zero_masked(Vec& v, const DropoutMask& mask) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!mask.kept[i]) v[i] = 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// public forward / loss
// ---------------------------------------------------------------------------

Matrix forward_batch(const MlpModel& m, const Matrix& X) {
    if (m.params.size() != m.param_count())
        throw ShapeError("model parameter vector has wrong length");
    Cache c;
    forward_core(m, m.params.data(), X, nullptr, c);
    return probs_from_logits(m, c.logits);
}

Matrix forward_batch(const MlpModel& m, const Matrix& X, const DropoutMask& mask) {
    Vec theta = masked_params(m, mask);
    Cache c;
    forward_core(m, theta.data(), X, nullptr, c);
    return probs_from_logits(m, c.logits);
}

Categorical forward(const MlpModel& m, const Vec& x, const DropoutMask& mask) {
    if (x.size() != m.in_dim()) throw ShapeError("forward: input width != model input");
    Matrix X(1, x.size());
    std::memcpy(X.data(), x.data(), x.size() * sizeof(double));
    Matrix P = forward_batch(m, X, mask);
    return Categorical{P.row_vec(0)};
}

Categorical forward(const MlpModel& m, const Vec& x) {
    return forward(m, x, DropoutMask::all_kept(m.param_count()));
}

LossGrad loss_and_grad(const MlpModel& m, const Matrix& X,
                       const std::vector<int>& labels, const DropoutMask& mask) {
    check_labels(m, labels);
    Vec theta = masked_params(m, mask);
    LossGrad lg = backprop(m, theta.data(), X, labels, nullptr);
    zero_masked(lg.grad, mask);
    return lg;
}

LossGrad loss_and_grad(const MlpModel& m, const Matrix& X,
                       const std::vector<int>& labels) {
    return loss_and_grad(m, X, labels, DropoutMask::all_kept(m.param_count()));
}

EvalResult evaluate(const MlpModel& m, const Dataset& data) {
    data.validate();
    if (data.n_classes != m.n_classes())
        throw ShapeError("dataset class count != model output");
    Cache c;
    forward_core(m, m.params.data(), data.features, nullptr, c);
    EvalResult r;
    r.loss = mean_ce(m, c.logits, data.labels);
    Matrix P = probs_from_logits(m, c.logits);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < P.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < P.cols(); ++j)
            if (P(i, j) > P(i, best)) best = j;
        hits += (best == std::size_t(data.labels[i]));
    }
    r.accuracy = double(hits) / double(std::max<std::size_t>(P.rows(), 1));
    return r;
}

ForwardTrace trace_forward(const MlpModel& m, const Matrix& X) {
    if (m.params.size() != m.param_count())
        throw ShapeError("model parameter vector has wrong length");
    Cache c;
    forward_core(m, m.params.data(), X, nullptr, c);
    ForwardTrace t;
    t.layer_inputs.reserve(m.depth());
    t.layer_inputs.push_back(X);
    for (auto& a : c.in) t.layer_inputs.push_back(std::move(a));
    t.probs = probs_from_logits(m, c.logits);
    return t;
}

std::vector<Matrix> trace_zgrads(const MlpModel& m, const ForwardTrace& t,
                                 const std::vector<int>& labels) {
    std::size_t N = t.probs.rows();
    if (labels.size() != N) throw ShapeError("trace_zgrads: batch size != label count");
    if (t.layer_inputs.size() != m.depth())
        throw ShapeError("trace_zgrads: trace does not match model depth");
    check_labels(m, labels);
    std::vector<Matrix> zg(m.depth());
    Matrix D(N, m.out_dim());
    if (m.out_dim() == 1) {
        for (std::size_t i = 0; i < N; ++i)
            D(i, 0) = t.probs(i, 0) - (labels[i] == 0 ? 1.0 : 0.0);
    } else {
        D = t.probs;
        for (std::size_t i = 0; i < N; ++i) D(i, std::size_t(labels[i])) -= 1.0;
    }
    for (std::size_t l = m.depth(); l-- > 0;) {
        if (l == 0) {
            zg[0] = std::move(D);
            break;
        }
        zg[l] = D;
        std::size_t in_w = m.layer_in(l), out_w = m.layer_out(l);
        Matrix dA(N, in_w);
        simd::gemm_nn(D.data(), m.params.data() + m.weight_offset(l), dA.data(), N,
                      in_w, out_w);
        const Matrix& a = t.layer_inputs[l];  // post-activation of layer l-1
        for (std::size_t i = 0; i < N; ++i) {
            double* d = dA.row(i);
            const double* av = a.row(i);
            for (std::size_t u = 0; u < in_w; ++u)
                d[u] = m.act == Activation::sigmoid ? d[u] * av[u] * (1.0 - av[u])
                                                    : (av[u] > 0.0 ? d[u] : 0.0);
        }
        D = std::move(dA);
    }
    return zg;
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

namespace {

// Shared SGD loop. fixed_mask restricts updates to a coordinate subspace
// (projection training); stoch_p > 0 samples a fresh hidden-unit dropout
// pattern per batch with inverted scaling. Both default off reproduces ERM.
TrainResult sgd_train(const MlpModel& proto, const Dataset& data,
                      const DropoutMask& mask, double stoch_p, const TrainConfig& cfg) {
    cfg.validate();
    data.validate();
    if (data.dim() != proto.in_dim()) throw ShapeError("train: data width != model input");
    if (data.n_classes != proto.n_classes())
        throw ShapeError("train: dataset class count != model output");
    check_mask(proto, mask);

    Rng rng(cfg.seed);
    MlpModel m = make_mlp(proto.sizes, proto.act, rng);
    zero_masked(m.params, mask);

    TrainResult res;
    if (mask.count_kept() == 0) {
        // Nothing trainable: the zero model predicts the uniform distribution.
        res.model = std::move(m);
        res.final_loss = std::log(double(proto.n_classes()));
        res.epoch_loss.assign(cfg.epochs, res.final_loss);
        return res;
    }

    std::size_t N = data.size();
    std::size_t B = std::min<std::size_t>(cfg.batch_size, N);
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);

    Matrix Xb(B, data.dim());
    std::vector<int> yb(B);
    UnitScales scales(m.depth() > 0 ? m.depth() - 1 : 0);
    double last_finite = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double ep_sum = 0.0;
        for (std::size_t start = 0; start < N; start += B) {
            std::size_t b = std::min(B, N - start);
            if (Xb.rows() != b) Xb = Matrix(b, data.dim());
            yb.resize(b);
            for (std::size_t i = 0; i < b; ++i) {
                std::size_t src = order[start + i];
                std::memcpy(Xb.row(i), data.features.row(src),
                            data.dim() * sizeof(double));
                yb[i] = data.labels[src];
            }
            const UnitScales* sp = nullptr;
            if (stoch_p > 0.0) {
                double keep_scale = 1.0 / (1.0 - stoch_p);
                for (std::size_t h = 0; h < scales.size(); ++h) {
                    scales[h].assign(m.sizes[h + 1], keep_scale);
                    for (double& su : scales[h])
                        if (rng.uniform() < stoch_p) su = 0.0;
                }
                sp = &scales;
            }
            LossGrad lg = backprop(m, m.params.data(), Xb, yb, sp);
            if (cfg.l2 > 0.0) axpy(cfg.l2, m.params, lg.grad);
            if (cfg.regularizer) lg.loss += cfg.regularizer(m.params, lg.grad);
            if (!std::isfinite(lg.loss)) {
                std::ostringstream msg;
                msg << "training diverged at epoch " << epoch + 1
                    << " (last finite loss " << last_finite << ")";
                throw NumericalError(msg.str());
            }
            last_finite = lg.loss;
            zero_masked(lg.grad, mask);
            axpy(-cfg.learning_rate, lg.grad, m.params);
            ep_sum += lg.loss * double(b);
        }
        res.epoch_loss.push_back(ep_sum / double(N));
    }

    Cache c;
    forward_core(m, m.params.data(), data.features, nullptr, c);
    res.final_loss = mean_ce(m, c.logits, data.labels);
    res.model = std::move(m);
    return res;
}

}  // namespace

TrainResult train_projection(const MlpModel& proto, const Dataset& data,
                             const DropoutMask& mask, const TrainConfig& cfg) {
    return sgd_train(proto, data, mask, 0.0, cfg);
}

TrainResult train_stochastic(const MlpModel& proto, const Dataset& data,
                             const TrainConfig& cfg) {
    return sgd_train(proto, data, DropoutMask::all_kept(proto.param_count()),
                     cfg.dropout_rate, cfg);
}

// ---------------------------------------------------------------------------
// mask sampling
// ---------------------------------------------------------------------------

std::vector<DropoutMask> sample_masks(const MlpModel& m, double p, std::size_t n_masks,
                                      Rng& rng, MaskScheme scheme) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("mask rate must be in [0,1)");
    std::size_t n = m.param_count();
    std::vector<DropoutMask> out;
    out.reserve(n_masks);
    for (std::size_t k = 0; k < n_masks; ++k) {
        if (p == 0.0) {  // consumes no draws
            out.push_back(DropoutMask::all_kept(n));
            continue;
        }
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            DropoutMask mask = DropoutMask::all_kept(n);
            bool degenerate = false;
            if (scheme == MaskScheme::unit) {
                // Drop hidden units; a dropped unit takes its incoming row,
                // its bias and its outgoing column with it.
                for (std::size_t l = 0; l + 1 < m.depth(); ++l) {
                    std::size_t width = m.layer_out(l);
                    std::size_t dropped = 0;
                    for (std::size_t u = 0; u < width; ++u) {
                        if (rng.uniform() >= p) continue;
                        ++dropped;
                        std::size_t in_w = m.layer_in(l);
                        std::size_t row = m.weight_offset(l) + u * in_w;
                        for (std::size_t j = 0; j < in_w; ++j) mask.kept[row + j] = 0;
                        mask.kept[m.bias_offset(l) + u] = 0;
                        std::size_t next_out = m.layer_out(l + 1);
                        std::size_t next_w = m.weight_offset(l + 1);
                        for (std::size_t r = 0; r < next_out; ++r)
                            mask.kept[next_w + r * width + u] = 0;
                    }
                    if (dropped == width) degenerate = true;
                }
            } else {
                for (std::size_t i = 0; i < n; ++i)
                    if (rng.uniform() < p) mask.kept[i] = 0;
                // Output-layer biases stay trainable no matter what.
                std::size_t ob = m.bias_offset(m.depth() - 1);
                for (std::size_t j = 0; j < m.out_dim(); ++j) mask.kept[ob + j] = 1;
                for (std::size_t l = 0; l < m.depth() && !degenerate; ++l) {
                    std::size_t nw = m.layer_out(l) * m.layer_in(l);
                    const std::uint8_t* w = mask.kept.data() + m.weight_offset(l);
                    degenerate = std::all_of(w, w + nw,
                                             [](std::uint8_t v) { return v == 0; });
                }
            }
            if (!degenerate) {
                out.push_back(std::move(mask));
                ok = true;
            }
        }
        if (!ok)
            throw DegenerateMaskError("mask rate " + std::to_string(p) +
                                      " kept producing an all-dropped layer "
                                      "(100 attempts)");
    }
    return out;
}

// ---------------------------------------------------------------------------
// jacobian rank
// ---------------------------------------------------------------------------

namespace {

// Singular values via one-sided Jacobi (columns of A orthogonalized in
// place). Small problems only; returns values in descending order.
Vec singular_values(const Matrix& A) {
    Matrix W = transpose(A);  // rows of W are columns of A
    std::size_t p = W.rows(), n = W.cols();
    for (int sweep = 0; sweep < 60; ++sweep) {
        double amax = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            amax = std::max(amax, simd::dot(W.row(i), W.row(i), n));
        bool rotated = false;
        for (std::size_t i = 0; i < p && amax > 0.0; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                double a = simd::dot(W.row(i), W.row(i), n);
                double b = simd::dot(W.row(j), W.row(j), n);
                double c = simd::dot(W.row(i), W.row(j), n);
                // columns at rounding-noise scale carry no rank information;
                // rotating them forever would chase noise directions
                if (a <= 1e-28 * amax || b <= 1e-28 * amax) continue;
                if (std::fabs(c) <= 1e-14 * std::sqrt(a * b)) continue;
                double tau = (b - a) / (2.0 * c);
                double t = (tau >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                double cs = 1.0 / std::sqrt(1.0 + t * t);
                double sn = t * cs;
                // rot: x <- c x + s y, y <- c y - s x  with x=row j, y=row i
                simd::rot(W.row(j), W.row(i), cs, sn, n);
                rotated = true;
            }
        }
        if (!rotated) {
            Vec sv(p);
            for (std::size_t i = 0; i < p; ++i)
                sv[i] = std::sqrt(simd::dot(W.row(i), W.row(i), n));
            std::sort(sv.begin(), sv.end(), std::greater<double>());
            return sv;
        }
    }
    throw NumericalError("singular value iteration failed to converge");
}

}  // namespace

std::size_t jacobian_rank(const MlpModel& m, const Matrix& inputs) {
    if (m.depth() != 1 || m.out_dim() != 1)
        throw UnsupportedError("jacobian_rank expects a single sigmoid unit ({n,1})");
    if (inputs.cols() != m.in_dim())
        throw ShapeError("jacobian_rank: input width != model input");
    std::size_t N = inputs.rows(), n = m.in_dim();
    if (N == 0) return 0;
    const double* w = m.params.data();
    double bias = m.params[m.bias_offset(0)];
    Matrix G(N, n + 1);
    for (std::size_t i = 0; i < N; ++i) {
        double y = sigmoid(simd::dot(w, inputs.row(i), n) + bias);
        double s = y * (1.0 - y);
        for (std::size_t j = 0; j < n; ++j) G(i, j) = s * inputs(i, j);
        G(i, n) = s;
    }
    Vec sv = singular_values(G);
    if (sv.empty() || sv[0] <= 0.0) return 0;
    std::size_t rank = 0;
    for (double s : sv) rank += (s > 1e-8 * sv[0]);
    return rank;
}

// ---------------------------------------------------------------------------
// checkpoints
// ---------------------------------------------------------------------------

namespace {

void put_u32(std::ostream& f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& f, const std::string& path) {
    unsigned char b[4];
    if (!f.read(reinterpret_cast<char*>(b), 4))
        throw FormatError("truncated checkpoint: " + path);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

}  // namespace

void save_model(const MlpModel& m, const std::string& path) {
    if (m.params.size() != m.param_count())
        throw ShapeError("model parameter vector has wrong length");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot write checkpoint: " + path);
    f.write("GDRP", 4);
    put_u32(f, 1u);  // version
    put_u32(f, m.act == Activation::sigmoid ? 0u : 1u);
    put_u32(f, std::uint32_t(m.sizes.size()));
    for (std::size_t s : m.sizes) put_u32(f, std::uint32_t(s));
    f.write(reinterpret_cast<const char*>(m.params.data()),
            std::streamsize(m.params.size() * sizeof(double)));
    if (!f) throw FormatError("short write on checkpoint: " + path);
}

MlpModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open checkpoint: " + path);
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, "GDRP", 4) != 0)
        throw FormatError("bad checkpoint magic: " + path);
    std::uint32_t version = get_u32(f, path);
    if (version != 1) throw FormatError("unsupported checkpoint version in " + path);
    std::uint32_t act = get_u32(f, path);
    if (act > 1) throw FormatError("bad activation tag in " + path);
    std::uint32_t count = get_u32(f, path);
    if (count < 2 || count > 64) throw FormatError("bad layer count in " + path);
    std::vector<std::size_t> sizes(count);
    for (auto& s : sizes) {
        std::uint32_t v = get_u32(f, path);
        if (v == 0 || v > (1u << 24)) throw FormatError("bad layer width in " + path);
        s = v;
    }
    MlpModel m = make_mlp_zero(sizes, act == 0 ? Activation::sigmoid : Activation::relu);
    if (!f.read(reinterpret_cast<char*>(m.params.data()),
                std::streamsize(m.params.size() * sizeof(double))))
        throw FormatError("truncated checkpoint: " + path);
    f.peek();
    if (!f.eof()) throw FormatError("trailing bytes in checkpoint: " + path);
    check_finite(m.params, "checkpoint parameters");
    return m;
}

}  // namespace geodrop

#include "geodrop/dropout_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <json.hpp>

namespace geodrop {

void EnsembleSpec::validate() const {
    if (n_masks < 1) throw ConfigError("ensemble: n_masks must be >= 1");
    if (!(rate >= 0.0 && rate < 1.0))
        throw ConfigError("ensemble: rate must be in [0,1)");
    if (!std::isfinite(alpha)) throw ConfigError("ensemble: alpha must be finite");
    train.validate();
    if (!weights.weights.empty()) {
        if (weights.weights.size() != n_masks)
            throw ShapeError("ensemble: weight count != n_masks");
        validate_simplex(weights.weights, "ensemble weights");
    }
}

namespace {

Vec weighted_average(const std::vector<Vec>& members, const Vec& weights) {
    Vec avg(members[0].size(), 0.0);
    for (std::size_t k = 0; k < members.size(); ++k) {
        if (members[k].size() != avg.size())
            throw ShapeError("ensemble: member parameter length mismatch");
        axpy(weights[k], members[k], avg);
    }
    return avg;
}

// w_k proportional to the Bernoulli(p) probability of drawing mask k, over
// the draws the scheme actually makes (hidden units, or every coordinate
// except output biases). Log-space with a max shift: the products underflow
// long before the ratios become degenerate.
Vec likelihood_weights(const MlpModel& m, const std::vector<DropoutMask>& masks,
                       double p, MaskScheme scheme) {
    std::size_t K = masks.size();
    if (p == 0.0) return Vec(K, 1.0 / double(K));
    Vec logw(K);
    for (std::size_t k = 0; k < K; ++k) {
        std::size_t dropped = 0, total = 0;
        if (scheme == MaskScheme::unit) {
            for (std::size_t l = 0; l + 1 < m.depth(); ++l)
                for (std::size_t u = 0; u < m.layer_out(l); ++u) {
                    ++total;
                    dropped += (masks[k].kept[m.bias_offset(l) + u] == 0);
                }
        } else {
            std::size_t ob = m.bias_offset(m.depth() - 1);
            for (std::size_t i = 0; i < masks[k].size(); ++i) {
                if (i >= ob && i < ob + m.out_dim()) continue;
                ++total;
                dropped += (masks[k].kept[i] == 0);
            }
        }
        logw[k] = double(dropped) * std::log(p) +
                  double(total - dropped) * std::log1p(-p);
    }
    double mx = *std::max_element(logw.begin(), logw.end());
    double z = 0.0;
    for (double& v : logw) {
        v = std::exp(v - mx);
        z += v;
    }
    for (double& v : logw) v /= z;
    return logw;
}

// Combine one input's member predictions. A single member short-circuits so
// the K=1 ensemble is bit-identical to its only member.
Categorical integrate_rows(const std::vector<Matrix>& member_probs, std::size_t row,
                           const WeightVector& w, double alpha) {
    if (member_probs.size() == 1)
        return Categorical{member_probs[0].row_vec(row)};
    std::vector<Categorical> dists;
    dists.reserve(member_probs.size());
    for (const Matrix& P : member_probs) dists.push_back(Categorical{P.row_vec(row)});
    return alpha_integrate(dists, w, alpha);
}

MemberMetrics metrics_from_probs(const std::vector<Categorical>& preds,
                                 const std::vector<int>& labels) {
    MemberMetrics mm;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const Vec& p = preds[i].probs;
        std::size_t best = 0;
        for (std::size_t j = 1; j < p.size(); ++j)
            if (p[j] > p[best]) best = j;
        hits += (best == std::size_t(labels[i]));
        mm.test_loss += -std::log(std::max(p[std::size_t(labels[i])], 1e-300));
    }
    mm.test_loss /= double(std::max<std::size_t>(preds.size(), 1));
    mm.test_accuracy = double(hits) / double(std::max<std::size_t>(preds.size(), 1));
    return mm;
}

double tv_distance(const Vec& p, const Vec& q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::fabs(p[i] - q[i]);
    return 0.5 * acc;
}

[[noreturn]] void rethrow_with_member(std::size_t k) {
    std::string tag = "member " + std::to_string(k) + ": ";
    try {
        throw;
    } catch (const NumericalError& e) {
        throw NumericalError(tag + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(tag + e.what());
    } catch (const ShapeError& e) {
        throw ShapeError(tag + e.what());
    } catch (const DomainError& e) {
        throw DomainError(tag + e.what());
    } catch (const CapacityError& e) {
        throw CapacityError(tag + e.what());
    } catch (const UnsupportedError& e) {
        throw UnsupportedError(tag + e.what());
    } catch (const Error& e) {
        throw Error(tag + e.what());
    }
}

}  // namespace

void EnsembleResult::check_average(double tol) const {
    Vec expect = weighted_average(members, weights);
    for (std::size_t i = 0; i < expect.size(); ++i)
        if (std::fabs(expect[i] - averaged[i]) > tol)
            throw NumericalError("ensemble: averaged parameters drifted from "
                                 "sum w_k theta_k");
}

Categorical predict_integrated(const MlpModel& proto, const std::vector<Vec>& members,
                               const Vec& x, const WeightVector& w, double alpha) {
    if (members.empty()) throw ShapeError("predict_integrated: no members");
    if (w.weights.size() != members.size())
        throw ShapeError("predict_integrated: weight count != member count");
    MlpModel m = proto;
    if (members.size() == 1) {
        m.params = members[0];
        return forward(m, x);
    }
    std::vector<Categorical> dists;
    dists.reserve(members.size());
    for (const Vec& theta : members) {
        m.params = theta;
        dists.push_back(forward(m, x));
    }
    return alpha_integrate(dists, w, alpha);
}

double flatness_gap(const MlpModel& proto, const std::vector<Vec>& members,
                    const WeightVector& w, const Dataset& data, double alpha) {
    if (members.size() < 2) throw ShapeError("flatness_gap: needs >= 2 members");
    if (w.weights.size() != members.size())
        throw ShapeError("flatness_gap: weight count != member count");
    data.validate();
    MlpModel m = proto;
    std::vector<Matrix> member_probs;
    member_probs.reserve(members.size());
    for (const Vec& theta : members) {
        m.params = theta;
        member_probs.push_back(forward_batch(m, data.features));
    }
    m.params = weighted_average(members, w.weights);
    Matrix avg_probs = forward_batch(m, data.features);
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        Categorical mix = integrate_rows(member_probs, i, w, alpha);
        acc += tv_distance(avg_probs.row_vec(i), mix.probs);
    }
    return acc / double(data.size());
}

EnsembleResult run_ensemble(const MlpModel& proto, const Dataset& train,
                            const Dataset& test, const EnsembleSpec& spec, Rng& rng) {
    spec.validate();
    train.validate();
    test.validate();
    std::size_t K = spec.n_masks;

    EnsembleResult res;
    res.alpha = spec.alpha;
    res.masks = sample_masks(proto, spec.rate, K, rng, spec.scheme);

    if (!spec.weights.weights.empty())
        res.weights = spec.weights.weights;
    else if (spec.weighting == EnsembleWeighting::mask_likelihood)
        res.weights = likelihood_weights(proto, res.masks, spec.rate, spec.scheme);
    else
        res.weights = Vec(K, 1.0 / double(K));

    res.members.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        TrainConfig cfg = spec.train;
        cfg.seed = Rng::mix(spec.train.seed, k);
        try {
            res.members.push_back(
                train_projection(proto, train, res.masks[k], cfg).model.params);
        } catch (const Error&) {
            rethrow_with_member(k);
        }
    }
    res.averaged = weighted_average(res.members, res.weights);

    // member and combined metrics on the test split
    MlpModel m = proto;
    std::vector<Matrix> member_probs;
    member_probs.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        m.params = res.members[k];
        EvalResult ev = evaluate(m, test);
        res.member_metrics.push_back({ev.loss, ev.accuracy});
        member_probs.push_back(forward_batch(m, test.features));
    }
    m.params = res.averaged;
    EvalResult av = evaluate(m, test);
    res.averaged_metrics = {av.loss, av.accuracy};

    std::vector<Categorical> integrated;
    integrated.reserve(test.size());
    WeightVector w{res.weights};
    for (std::size_t i = 0; i < test.size(); ++i)
        integrated.push_back(integrate_rows(member_probs, i, w, spec.alpha));
    res.integrated_metrics = metrics_from_probs(integrated, test.labels);

    Matrix avg_probs = forward_batch(m, test.features);
    double acc = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i)
        acc += tv_distance(avg_probs.row_vec(i), integrated[i].probs);
    res.flatness_gap = test.size() ? acc / double(test.size()) : 0.0;

    res.check_average();
    return res;
}

std::string EnsembleResult::to_json() const {
    nlohmann::json j;
    j["n_members"] = members.size();
    j["alpha"] = alpha;
    j["weights"] = weights;
    j["flatness_gap"] = flatness_gap;
    j["masks"] = nlohmann::json::array();
    for (const DropoutMask& mk : masks)
        j["masks"].push_back({{"size", mk.size()}, {"kept", mk.count_kept()}});
    auto metrics = [](const MemberMetrics& mm) {
        return nlohmann::json{{"test_loss", mm.test_loss},
                              {"test_accuracy", mm.test_accuracy}};
    };
    j["member_metrics"] = nlohmann::json::array();
    for (const MemberMetrics& mm : member_metrics)
        j["member_metrics"].push_back(metrics(mm));
    j["averaged_metrics"] = metrics(averaged_metrics);
    j["integrated_metrics"] = metrics(integrated_metrics);
    return j.dump(2);
}

}  // namespace geodrop

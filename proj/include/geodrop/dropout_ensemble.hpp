#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "geodrop/mask.hpp"
#include "geodrop/matrix.hpp"
#include "geodrop/mixtures.hpp"
#include "geodrop/models.hpp"
#include "geodrop/rng.hpp"

namespace geodrop {

enum class EnsembleWeighting { uniform, mask_likelihood };

// A dropout ensemble: K independently trained masked projections of one
// architecture, recombined two ways — averaging parameters, and integrating
// the predictive distributions at a chosen alpha.
struct EnsembleSpec {
    std::size_t n_masks = 1;
    WeightVector weights;  // empty -> uniform 1/K
    MaskScheme scheme = MaskScheme::unit;
    double rate = 0.5;
    double alpha = 1.0;
    EnsembleWeighting weighting = EnsembleWeighting::uniform;
    TrainConfig train;

    void validate() const;
};

struct MemberMetrics {
    double test_loss = 0.0;
    double test_accuracy = 0.0;
};

struct EnsembleResult {
    std::vector<DropoutMask> masks;
    std::vector<Vec> members;        // theta*_k, one per mask
    Vec weights;                     // w_k actually used
    Vec averaged;                    // theta*_D = sum_k w_k theta*_k
    double alpha = 1.0;
    std::vector<MemberMetrics> member_metrics;
    MemberMetrics averaged_metrics;    // parameter-averaged model on test data
    MemberMetrics integrated_metrics;  // alpha-integrated predictions on test data
    double flatness_gap = 0.0;

    // Re-verify the arithmetic identity averaged == sum w_k members[k].
    void check_average(double tol = 1e-12) const;

    std::string to_json() const;
};

// Train one masked projection per sampled mask (member k seeds derive from
// spec.train.seed via Rng::mix, so results do not depend on scheduling),
// then recombine. Training failures are rethrown with the mask index
// attached. Metrics are computed on `test`.
EnsembleResult run_ensemble(const MlpModel& proto, const Dataset& train,
                            const Dataset& test, const EnsembleSpec& spec, Rng& rng);

// Alpha-integration of the member predictive distributions at one input.
Categorical predict_integrated(const MlpModel& proto, const std::vector<Vec>& members,
                               const Vec& x, const WeightVector& w, double alpha);

// Mean total-variation distance over the dataset between the prediction of
// the parameter-averaged model and the alpha-integrated member predictions.
// Zero exactly when parameter averaging and distribution integration agree
// on every test input.
double flatness_gap(const MlpModel& proto, const std::vector<Vec>& members,
                    const WeightVector& w, const Dataset& data, double alpha);

}  // namespace geodrop

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "geodrop/matrix.hpp"
#include "geodrop/models.hpp"
#include "geodrop/rng.hpp"

namespace geodrop {

enum class FimKind { exact, monte_carlo, kfac };

// Fisher information of the model's conditional distribution, averaged over
// an empirical input set. Either a dense matrix over the flat parameter
// vector (exact / monte_carlo) or per-layer Kronecker factors (kfac).
struct FimEstimate {
    FimKind kind = FimKind::exact;
    Matrix full;                                        // exact / monte_carlo
    std::vector<std::pair<Matrix, Matrix>> kfac_blocks; // (A_l, G_l) per layer
    std::size_t n_samples = 0;
};

// Throws NumericalError unless every stored matrix is symmetric PSD within
// tolerance (eigenvalue floor >= -1e-8 * trace).
void check_psd(const FimEstimate& est);

// Exact class-expectation FIM: average over inputs of
// E_{y~p(.|x)}[ grad log p  grad log p^T ], enumerating y directly.
// Dense over the flat parameters; CapacityError above 2000 of them.
FimEstimate exact_fim(const MlpModel& m, const Matrix& inputs);

// Sampling estimator: labels drawn from the model's own conditional,
// samples_per_input rounds over the input set. Unbiased for exact_fim.
FimEstimate mc_fim(const MlpModel& m, const Matrix& inputs,
                   std::size_t samples_per_input, Rng& rng);

// Kronecker-factored blocks: A_l = mean of bias-augmented layer inputs'
// outer products, G_l = exact class expectation of pre-activation gradient
// outer products. Block l approximates the FIM restricted to layer l.
FimEstimate kfac_fim(const MlpModel& m, const Matrix& inputs);

// Dense matrix in flat parameter order. For kfac this scatters each
// G_l(u,u') * A_l(j,j') product into the (weights..., biases) layout the
// models module uses; CapacityError above 2000 parameters.
Matrix materialize(const FimEstimate& est);

// Total parameter dimension covered by the estimate.
std::size_t fim_dim(const FimEstimate& est);

enum class FimNorm { frobenius, trace, spectral };
FimNorm fim_norm_from_name(const std::string& name);  // ConfigError on unknown
const char* fim_norm_name(FimNorm which);

// For kfac blocks:  frobenius = sqrt(sum_l |A_l|_F^2 |G_l|_F^2),
// trace = sum_l tr(A_l) tr(G_l), spectral = max_l lmax(A_l) lmax(G_l);
// the standard matrix norms for dense estimates.
double fim_norm(const FimEstimate& est, FimNorm which);

enum class PhiKind { fim_norm, distill, pac_bayes };

// Scalar penalty Phi(I(theta)) added to the training loss.
//   fim_norm:  mu * |I|
//   distill:   delta^T I delta   (KL to a displaced teacher, second order)
//   pac_bayes: lambda^2 C / (8 n) + log((delta^T I delta + 1/eps) / lambda)
struct PhiRegularizer {
    PhiKind kind = PhiKind::fim_norm;
    double mu = 0.0;
    FimNorm norm = FimNorm::frobenius;
    double lambda = 1.0;
    double C = 0.0;
    std::size_t n = 1;
    double eps = 1.0;
    Vec delta;  // parameter displacement for distill / pac_bayes

    void validate() const;  // DomainError on bad hyperparameters
};

double phi_value(const PhiRegularizer& reg, const FimEstimate& est, const Vec& theta);

// SGD on loss + Phi. The penalty is evaluated through the exact FIM of a
// fixed minibatch (the first batch_size examples), with its parameter
// gradient taken by central finite differences; that path is gated at 200
// parameters (CapacityError). mu = 0 with the fim_norm kind reproduces
// train_projection exactly.
TrainResult train_with_phi(const MlpModel& proto, const Dataset& data,
                           const PhiRegularizer& reg, const TrainConfig& cfg);

}  // namespace geodrop

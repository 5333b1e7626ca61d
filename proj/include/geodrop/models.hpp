#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "geodrop/mask.hpp"
#include "geodrop/matrix.hpp"
#include "geodrop/mixtures.hpp"
#include "geodrop/rng.hpp"

namespace geodrop {

enum class Activation { sigmoid, relu };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);  // ConfigError on unknown

// Fully-connected net. Parameters live in one flat vector so masks, optimizers
// and metric code can treat the model as a point in R^n:
//   for each layer l: W_l (out x in, row-major), then b_l (out).
// A final layer of width 1 is a Bernoulli head: forward() returns the 2-class
// distribution [sigma(z), 1 - sigma(z)], so labels are still class indices.
struct MlpModel {
    std::vector<std::size_t> sizes;  // input, hidden..., output widths
    Activation act = Activation::sigmoid;
    Vec params;

    std::size_t depth() const { return sizes.size() - 1; }  // weight layers
    std::size_t in_dim() const { return sizes.front(); }
    std::size_t out_dim() const { return sizes.back(); }
    std::size_t n_classes() const { return out_dim() == 1 ? 2 : out_dim(); }
    std::size_t layer_in(std::size_t l) const { return sizes[l]; }
    std::size_t layer_out(std::size_t l) const { return sizes[l + 1]; }

    std::size_t weight_offset(std::size_t l) const;
    std::size_t bias_offset(std::size_t l) const;
    std::size_t param_count() const;
};

// Architecture with params drawn uniform +-sqrt(6/(in+out)), zero biases.
MlpModel make_mlp(const std::vector<std::size_t>& sizes, Activation act, Rng& rng);
// Same shape, all params zero (useful as an architecture prototype).
MlpModel make_mlp_zero(const std::vector<std::size_t>& sizes, Activation act);

struct Dataset {
    Matrix features;               // N x d
    std::vector<int> labels;       // class indices 0..n_classes-1
    std::size_t n_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols(); }
    void validate() const;  // shapes agree, features finite, labels in range
    Dataset slice(std::size_t offset, std::size_t count) const;
};

using RegularizerHook = std::function<double(const Vec& theta, Vec& grad)>;

struct TrainConfig {
    double learning_rate = 0.1;
    std::size_t batch_size = 64;
    std::size_t epochs = 1;
    std::uint64_t seed = 0;
    double l2 = 0.0;
    double dropout_rate = 0.0;         // stochastic per-batch unit dropout
    RegularizerHook regularizer;       // adds penalty value, accumulates into grad

    void validate() const;  // ConfigError on bad ranges
};

// Forward pass. Masked parameter coordinates are treated as exactly zero.
Categorical forward(const MlpModel& m, const Vec& x, const DropoutMask& mask);
Categorical forward(const MlpModel& m, const Vec& x);
Matrix forward_batch(const MlpModel& m, const Matrix& X);                           // N x n_classes
Matrix forward_batch(const MlpModel& m, const Matrix& X, const DropoutMask& mask);

struct LossGrad {
    double loss = 0.0;  // mean cross-entropy over the batch
    Vec grad;           // exactly zero at masked coordinates
};
LossGrad loss_and_grad(const MlpModel& m, const Matrix& X,
                       const std::vector<int>& labels, const DropoutMask& mask);
LossGrad loss_and_grad(const MlpModel& m, const Matrix& X,
                       const std::vector<int>& labels);

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};
EvalResult evaluate(const MlpModel& m, const Dataset& data);

struct TrainResult {
    MlpModel model;        // trained parameters (masked coords exactly zero)
    Vec epoch_loss;        // mean training loss per epoch
    double final_loss = 0.0;
};

// SGD restricted to the mask's coordinate subspace. Initialization is redrawn
// from cfg.seed, so the result depends only on (architecture, data, mask,
// cfg). Masked coordinates are exactly zero at every step. An all-masked
// model is returned untrained (zero vector, loss ln K). Non-finite loss
// raises NumericalError carrying the last finite loss seen.
TrainResult train_projection(const MlpModel& proto, const Dataset& data,
                             const DropoutMask& mask, const TrainConfig& cfg);

// Plain SGD with per-batch stochastic unit dropout at rate cfg.dropout_rate
// (inverted scaling 1/(1-p) on kept hidden activations at train time; the
// returned parameters are used unscaled). rate 0 consumes no mask draws, so
// it reproduces ERM training exactly.
TrainResult train_stochastic(const MlpModel& proto, const Dataset& data,
                             const TrainConfig& cfg);

// Layer-level instrumentation for Fisher-information estimators: one forward
// pass can be reused across many per-class backward passes.
struct ForwardTrace {
    std::vector<Matrix> layer_inputs;  // [l] = input fed to layer l ([0] = X)
    Matrix probs;                      // N x n_classes
};
ForwardTrace trace_forward(const MlpModel& m, const Matrix& X);

// Pre-activation gradients d(-log p(labels_i | x_i)) / d z_l for every layer,
// one N x out_l matrix per layer, rows unscaled (no 1/N).
std::vector<Matrix> trace_zgrads(const MlpModel& m, const ForwardTrace& t,
                                 const std::vector<int>& labels);

enum class MaskScheme { unit, coordinate };

// Independent dropout masks over the parameter vector.
//   unit:       each hidden unit is dropped with prob p; dropping a unit masks
//               its incoming row, its bias and its outgoing column.
//   coordinate: each parameter is dropped with prob p.
// Output-layer biases are never masked. A draw that kills an entire layer is
// resampled; 100 consecutive failures raise DegenerateMaskError.
std::vector<DropoutMask> sample_masks(const MlpModel& m, double p, std::size_t n_masks,
                                      Rng& rng, MaskScheme scheme);

// Rank of the per-input output-gradient matrix [d y(x_i) / d theta]_i for a
// single sigmoid unit (sizes {n, 1}). Singular values above 1e-8 * sigma_max
// count. Generic position gives n + 1.
std::size_t jacobian_rank(const MlpModel& m, const Matrix& inputs);

// Checkpoint format: "GDRP" magic, then little-endian u32 version, u32
// activation tag, u32 size count, the sizes as u32, then the flat parameter
// vector as f64. FormatError on anything that does not parse back.
void save_model(const MlpModel& m, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace geodrop

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svqvae/dataset.hpp"
#include "svqvae/matrix.hpp"
#include "svqvae/numeric.hpp"
#include "svqvae/rng.hpp"

namespace svqvae {

enum class Variant { supervised, baseline };

Variant variant_from_string(const std::string& name);
std::string variant_to_string(Variant v);

struct LayerSpec {
    std::size_t width = 0;
    Activation act = Activation::linear;
};

struct ModelConfig {
    std::size_t input_dim = 0;
    std::vector<LayerSpec> encoder_layers;  // last width must equal code_dim
    std::size_t code_dim = 0;
    std::size_t num_codes = 0;              // supervised: number of classes
    std::vector<LayerSpec> decoder_layers;  // last: width input_dim, tanh
    double output_lo = -1.0;
    double output_hi = 1.0;
    double beta = 0.25;
    double gamma = 0.1;
    double learning_rate = 1e-3;
    std::size_t batch_size = 256;
    std::size_t epochs = 25;
    std::uint64_t seed = 1;
    Variant variant = Variant::supervised;
    double clip_norm = 0.0;  // 0 disables gradient-norm clipping
    std::size_t image_rows = 0;
    std::size_t image_cols = 0;

    void validate() const;
};

struct LayerParams {
    Matrix weights;  // in x out
    std::vector<double> bias;
    Activation act = Activation::linear;
};

struct Model {
    ModelConfig config;
    std::vector<LayerParams> encoder;
    std::vector<LayerParams> decoder;
    Matrix embedding;  // num_codes x code_dim, row i = code e_i
    std::vector<std::string> class_names;
};

// Xavier-uniform weights, zero biases, embedding rows uniform(-1/Y, 1/Y).
Model init_model(const ModelConfig& config, Rng& rng);

enum class Phase { train, eval };

struct LossTerms {
    double recon = 0.0;       // mean squared reconstruction error
    double vq = 0.0;          // mean ||z_e - e_t||^2 (t = label or nearest)
    double commit = 0.0;      // same distance, routed to the encoder side
    double mis_vq = 0.0;      // mean of I(k != y) ||z_e - e_k||^2
    double divergence = 0.0;  // same distance, routed to the encoder side
    double total = 0.0;       // recon + vq + beta*commit - (mis_vq + gamma*divergence)
};

struct ForwardTrace {
    Phase phase = Phase::train;
    std::vector<Matrix> encoder_pre;   // pre-activations per encoder layer
    std::vector<Matrix> encoder_out;   // activations per encoder layer
    Matrix z_e;                        // B x D, alias of last encoder output
    std::vector<int> nearest;          // k per sample, always computed
    std::vector<int> quant_index;      // index actually fed to the decoder
    Matrix z_q;                        // B x D
    std::vector<Matrix> decoder_pre;
    std::vector<Matrix> decoder_out;
    Matrix x_hat;                      // B x F, after output rescale
    LossTerms loss;
};

struct LayerGrads {
    Matrix weights;
    std::vector<double> bias;
};

struct Gradients {
    std::vector<LayerGrads> encoder;
    std::vector<LayerGrads> decoder;
    Matrix embedding;
    // Diagnostics for the straight-through contract: the reconstruction
    // gradient at z_q, the verbatim copy arriving at z_e, and the full z_e
    // gradient after the commitment and divergence contributions.
    Matrix recon_grad_zq;
    Matrix recon_grad_ze;
    Matrix ze_grad;
};

Matrix encode(const Model& model, const Matrix& x);

// k_b = argmin_j ||z_e_b - e_j||, ties broken toward the lowest index
std::vector<int> nearest_code(const Matrix& embedding, const Matrix& z_e);

// Supervised training routes through e_y (labels required); evaluation and
// the baseline variant route through the nearest code. Returns (z_q, k).
std::pair<Matrix, std::vector<int>> quantize(const Model& model, const Matrix& z_e,
                                             const std::vector<int>* labels, Phase phase);

Matrix decode(const Model& model, const Matrix& z_q);

// Full forward pass with loss breakdown. frozen_nearest overrides the
// nearest-code computation (used by gradient-check oracles that hold code
// selection fixed while parameters are perturbed).
ForwardTrace loss_forward(const Model& model, const Matrix& x, const std::vector<int>* labels,
                          Phase phase, const std::vector<int>* frozen_nearest = nullptr);

// Exact gradient routing: decoder gets the reconstruction term, z_e gets the
// straight-through copy plus commitment and divergence pulls, the embedding
// gets only the VQ and mis-class VQ terms.
Gradients backward(const Model& model, const ForwardTrace& trace, const Matrix& x,
                   const std::vector<int>* labels);

struct AdamState {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;

    std::vector<LayerGrads> encoder_m, encoder_v;
    std::vector<LayerGrads> decoder_m, decoder_v;
    Matrix embedding_m, embedding_v;
    std::uint64_t step = 0;

    static AdamState init(const Model& model);
};

void adam_step(Model& model, const Gradients& grads, AdamState& state, double lr);

// scales all gradients so their global L2 norm is at most max_norm
void clip_gradients(Gradients& grads, double max_norm);

struct ClassLatentStats {
    CovarianceMode mode = CovarianceMode::diagonal;
    std::vector<std::size_t> counts;       // per class
    Matrix means;                          // Y x D latent means
    Matrix stddev;                         // Y x D, diagonal mode
    std::vector<Matrix> chol_factors;      // per class D x D, full mode
    std::vector<double> class_distribution;  // empirical label frequencies

    bool usable(std::size_t class_index) const;
};

ClassLatentStats estimate_class_latent_stats(const Model& model, const Dataset& ds,
                                             CovarianceMode mode);

// Draw n samples: z ~ N(e_y, sigma_y) decoded to the data space. The mean is
// the embedding code, not the empirical latent mean. When class_index is
// empty, classes are drawn from the empirical label distribution. Returns the
// generated rows and the class index used for each row.
std::pair<Matrix, std::vector<int>> generate(const Model& model, const ClassLatentStats& stats,
                                             std::optional<int> class_index, std::size_t n,
                                             Rng& rng);

}  // namespace svqvae

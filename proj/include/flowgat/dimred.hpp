#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowgat/checkpoint.hpp"
#include "flowgat/matrix.hpp"
#include "flowgat/ops.hpp"
#include "flowgat/rng.hpp"

namespace flowgat {

enum class ReducerKind { ae_encoder, vae_encoder, pca };

ReducerKind parse_reducer(const std::string& name);  // "ae" | "vae" | "pca"
const char* reducer_name(ReducerKind kind);

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch = 128;
    double lr = 0.001;
    std::uint64_t seed = 0;
    std::size_t latent_dim = 8;
    std::size_t hidden_dim = 32;
    // Test hook: scales the reparameterization noise. 0 makes the VAE forward
    // pass deterministic (z = mu).
    double latent_noise_scale = 1.0;
};

// Symmetric MLP autoencoder D -> hidden -> latent -> hidden -> D with ReLU on
// hidden layers and linear outputs.
struct AeModel {
    std::vector<ad::DenseLayer> encoder;
    std::vector<ad::DenseLayer> decoder;
    std::vector<double> training_loss_history;  // epoch-mean MSE

    std::size_t input_dim() const { return encoder.front().d_in(); }
    std::size_t latent_dim() const { return encoder.back().d_out(); }
    std::vector<ad::TensorPtr> params() const;
};

struct VaeEpochStats {
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
};

struct VaeModel {
    std::vector<ad::DenseLayer> encoder_trunk;  // D -> hidden
    ad::DenseLayer mu_head;                     // hidden -> latent
    ad::DenseLayer logvar_head;                 // hidden -> latent, output clamped to [-10, 10]
    std::vector<ad::DenseLayer> decoder;        // latent -> hidden -> D
    std::vector<VaeEpochStats> elbo_history;    // epoch means

    std::size_t input_dim() const { return encoder_trunk.front().d_in(); }
    std::size_t latent_dim() const { return mu_head.d_out(); }
    std::vector<ad::TensorPtr> params() const;
};

struct PcaModel {
    std::vector<double> mean;                      // [D]
    FeatureMatrix components;                      // [C x D], rows orthonormal
    std::vector<double> explained_variance_ratio;  // [C], non-increasing
    std::vector<double> singular_values;           // [C]

    std::size_t input_dim() const { return components.cols; }
    std::size_t latent_dim() const { return components.rows; }
};

// Fresh Glorot-initialized models; exposed so tests can build untrained
// baselines or hand-set weights.
AeModel make_autoencoder(std::size_t input_dim, const TrainConfig& cfg, Rng& rng);
VaeModel make_vae(std::size_t input_dim, const TrainConfig& cfg, Rng& rng);

// Minimizes mean squared reconstruction error with Adam over seeded shuffled
// mini-batches. Deterministic per seed.
AeModel train_autoencoder(const FeatureMatrix& train, const TrainConfig& cfg);

// Minimizes element-mean MSE + batch-mean KL(q(z|x) || N(0, I)) with the
// reparameterization z = mu + exp(logvar/2) * eps. Deterministic per seed.
VaeModel train_vae(const FeatureMatrix& train, const TrainConfig& cfg);

// Closed-form KL(N(mu, diag exp(logvar)) || N(0, I)) for one latent vector:
// 0.5 * sum(mu^2 + exp(logvar) - 1 - logvar).
double kl_standard_normal(std::span<const double> mu, std::span<const double> logvar);

// Thin SVD of the mean-centered matrix. Component signs are fixed so each
// row's largest-magnitude entry is positive; variance ratios use all singular
// values of the centered matrix as the denominator.
PcaModel fit_pca(const FeatureMatrix& train, std::size_t n_components = 8);

// Project to the latent space. AE: encoder forward; VAE: mu head (no
// sampling); PCA: (x - mean) * components^T.
FeatureMatrix reduce(const AeModel& model, const FeatureMatrix& data);
FeatureMatrix reduce(const VaeModel& model, const FeatureMatrix& data);
FeatureMatrix reduce(const PcaModel& model, const FeatureMatrix& data);

FeatureMatrix ae_reconstruct(const AeModel& model, const FeatureMatrix& data);
double reconstruction_mse(const AeModel& model, const FeatureMatrix& data);

struct VaeLossParts {
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
};

// Evaluates the VAE objective on the given rows without touching parameters.
// eps supplies the reparameterization noise (rows x latent, row-major);
// nullptr means zero noise.
VaeLossParts vae_eval_loss(const VaeModel& model, const FeatureMatrix& data,
                           const std::vector<double>* eps = nullptr);

// reduced * components + mean; with C = D this inverts reduce exactly.
FeatureMatrix pca_inverse_transform(const PcaModel& model, const FeatureMatrix& reduced);

Checkpoint to_checkpoint(const AeModel& model);
Checkpoint to_checkpoint(const VaeModel& model);
Checkpoint to_checkpoint(const PcaModel& model);
AeModel ae_from_checkpoint(const Checkpoint& ckpt);
VaeModel vae_from_checkpoint(const Checkpoint& ckpt);
PcaModel pca_from_checkpoint(const Checkpoint& ckpt);

}  // namespace flowgat

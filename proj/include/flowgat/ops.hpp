#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowgat/rng.hpp"
#include "flowgat/tensor.hpp"

namespace flowgat::ad {

enum class Activation { relu, softmax_rows };

// Fully connected layer; weight is [d_in x d_out], bias [d_out].
// Initialization is Glorot-style uniform from the given Rng.
struct DenseLayer {
    TensorPtr weight;
    TensorPtr bias;

    DenseLayer() = default;
    DenseLayer(std::size_t d_in, std::size_t d_out, Rng& rng, const std::string& name_prefix);

    std::size_t d_in() const { return weight->shape[0]; }
    std::size_t d_out() const { return weight->shape[1]; }
};

TensorPtr glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                         Rng& rng, std::string name);

// out[B x n] = a[B x m] * b[m x n]
TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b);

// adds a length-n bias row to every row of x[B x n]
TensorPtr add_bias(Tape& tape, const TensorPtr& x, const TensorPtr& bias);

// out = x * weight + bias, recorded on the tape when gradients are required
TensorPtr dense_forward(Tape& tape, const TensorPtr& input, const DenseLayer& layer);

// relu or row-wise softmax (max-subtracted). Validates inputs are finite.
TensorPtr activate(Tape& tape, const TensorPtr& input, Activation kind);

TensorPtr relu(Tape& tape, const TensorPtr& x);
TensorPtr softmax_rows(Tape& tape, const TensorPtr& x);

// elementwise sum of two same-shape tensors
TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b);

// clamps to [lo, hi]; gradient passes through only inside the range
TensorPtr clamp(Tape& tape, const TensorPtr& x, double lo, double hi);

// z = mu + exp(logvar / 2) * eps, with eps a fixed noise buffer
TensorPtr reparameterize(Tape& tape, const TensorPtr& mu, const TensorPtr& logvar,
                         const std::vector<double>& eps);

// mean over all elements of (pred - target)^2; target is a constant
TensorPtr mse_loss(Tape& tape, const TensorPtr& pred, const TensorPtr& target);

// elementwise multiplication by a fixed factor (not differentiated through)
TensorPtr scale(Tape& tape, const TensorPtr& x, double factor);

// batch mean of the closed-form KL(N(mu, diag exp(logvar)) || N(0, I))
TensorPtr kl_gaussian_standard_mean(Tape& tape, const TensorPtr& mu, const TensorPtr& logvar);

// mean cross-entropy of softmax(logits[id]) vs labels[id] over the given node
// ids; optional per-class weights turn it into a weighted mean.
TensorPtr cross_entropy_mean(Tape& tape, const TensorPtr& logits, const std::vector<int>& labels,
                             const std::vector<std::uint32_t>& ids,
                             const std::vector<double>* class_weights = nullptr);

// scalar = sum(coeffs * x); used to reduce non-scalar ops for gradient checks
TensorPtr weighted_sum(Tape& tape, const TensorPtr& x, const std::vector<double>& coeffs);

}  // namespace flowgat::ad

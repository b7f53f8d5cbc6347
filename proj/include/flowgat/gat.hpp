#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowgat/checkpoint.hpp"
#include "flowgat/dataset.hpp"
#include "flowgat/knn_graph.hpp"
#include "flowgat/matrix.hpp"
#include "flowgat/ops.hpp"

namespace flowgat {

// Train/val/test node-id masks over the single transductive graph.
using RoleMasks = SplitIds;

// Throws ConfigError unless the masks are pairwise disjoint and exhaustive
// over [0, node_count).
void validate_masks(const RoleMasks& masks, std::size_t node_count);

// KnnGraph plus a self-loop per node, rows sorted, with a slot-level
// transpose index: transpose[p] is the slot of edge (j, i) when slot p holds
// (i, j). Requires a symmetric input graph. The transpose index lets backward
// passes gather instead of scatter, keeping parallel runs deterministic.
struct AugmentedGraph {
    std::size_t node_count = 0;
    std::vector<std::uint64_t> offsets;    // node_count + 1
    std::vector<std::uint32_t> cols;       // sorted per row, self included
    std::vector<std::uint64_t> transpose;  // involution over slots

    static AugmentedGraph from(const KnnGraph& graph);

    std::span<const std::uint32_t> row(std::size_t i) const {
        return {cols.data() + offsets[i], static_cast<std::size_t>(offsets[i + 1] - offsets[i])};
    }
};

// One multi-head GAT layer: per head a shared projection W[d_in x K] and an
// attention vector a[2K] (first K dotted with W·h_i, last K with W·h_j).
struct GatLayerParams {
    std::vector<ad::TensorPtr> weights;  // H of [d_in x K]
    std::vector<ad::TensorPtr> attn;     // H of [2K]
    double negative_slope = 0.2;

    std::size_t heads() const { return weights.size(); }
    std::size_t d_in() const { return weights.front()->shape[0]; }
    std::size_t head_dim() const { return weights.front()->shape[1]; }
};

GatLayerParams make_gat_layer(std::size_t d_in, std::size_t head_dim, std::size_t heads,
                              double negative_slope, Rng& rng, const std::string& name_prefix);

enum class HeadCombine { concat, mean };

// Attention weights of one node under one head: softmax over
// LeakyReLU(a^T [W h_i || W h_j]) for j in N(i) ∪ {i}, in augmented-row
// order. Rows sum to 1.
std::vector<double> attention_coefficients(const FeatureMatrix& features,
                                           const AugmentedGraph& graph,
                                           const GatLayerParams& params, std::size_t head,
                                           std::size_t node);

// Multi-head attention aggregation h'_i = sum_j alpha_ij W h_j per head,
// heads concatenated or averaged. Returns the pre-activation output
// [N x H·K] (concat) or [N x K] (mean); recorded on the tape with a
// hand-derived backward. The graph is captured by reference and must outlive
// the tape.
ad::TensorPtr gat_layer_forward(ad::Tape& tape, const ad::TensorPtr& features,
                                const AugmentedGraph& graph, const GatLayerParams& params,
                                HeadCombine combine);

struct GatTopology {
    std::size_t input_dim = 8;
    std::size_t heads = 4;      // H
    std::size_t head_dim = 8;   // K
    std::size_t label_count = LabelMap::kClassCount;
    double negative_slope = 0.2;
};

struct GatTrainConfig {
    GatTopology topology;
    std::size_t epochs = 20;
    std::size_t batch = 128;
    double lr = 0.001;
    std::uint64_t seed = 0;
    bool class_weights = false;  // optional inverse-frequency weighting, default off
};

struct GatEpochStats {
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

// Two GAT layers (concat+ReLU then mean+identity) and a dense classifier head.
struct GatModel {
    GatTopology topology;
    GatLayerParams layer1;        // input_dim -> H·K
    GatLayerParams layer2;        // H·K -> K
    ad::DenseLayer classifier;    // K -> label_count
    std::vector<GatEpochStats> history;
    std::vector<std::string> warnings;

    std::vector<ad::TensorPtr> params() const;
};

GatModel make_gat_model(const GatTopology& topology, Rng& rng);

// Class logits [N x label_count] for every node.
ad::TensorPtr gat_model_forward(ad::Tape& tape, const GatModel& model,
                                const AugmentedGraph& graph, const ad::TensorPtr& features);

// Mini-batches of target nodes over full-graph forward passes; masked
// cross-entropy, Adam updates per batch, per-epoch train/val stats.
// Deterministic per seed.
GatModel train_gat(const KnnGraph& graph, const FeatureMatrix& features,
                   const std::vector<int>& labels, const RoleMasks& masks,
                   const GatTrainConfig& cfg);

struct GatPrediction {
    std::vector<int> classes;  // argmax per requested node
    FeatureMatrix probs;       // [ids x label_count], rows sum to 1
};

GatPrediction predict(const GatModel& model, const KnnGraph& graph, const FeatureMatrix& features,
                      const std::vector<std::uint32_t>& node_ids);

void save_history_csv(const std::string& path, const std::vector<GatEpochStats>& history);

Checkpoint to_checkpoint(const GatModel& model);
GatModel gat_from_checkpoint(const Checkpoint& ckpt);

}  // namespace flowgat

#include "flowgat/gat.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <numeric>

#include "flowgat/errors.hpp"
#include "flowgat/kernels.hpp"
#include "flowgat/optim.hpp"

namespace flowgat {

namespace {

double leaky(double v, double slope) { return v > 0.0 ? v : slope * v; }
double leaky_grad(double v, double slope) { return v > 0.0 ? 1.0 : slope; }

bool layer_wants_grad(const ad::Tape& tape, const ad::TensorPtr& x, const GatLayerParams& p) {
    if (!tape.recording()) return false;
    if (x->requires_grad) return true;
    for (const auto& w : p.weights) {
        if (w->requires_grad) return true;
    }
    for (const auto& a : p.attn) {
        if (a->requires_grad) return true;
    }
    return false;
}

// Per-head forward intermediates kept alive for the backward closure.
struct HeadState {
    std::vector<double> z;      // N x K projected features
    std::vector<double> s;      // z_i . a[0..K)
    std::vector<double> t;      // z_i . a[K..2K)
    std::vector<double> u;      // per slot, pre-LeakyReLU logit s_i + t_j
    std::vector<double> alpha;  // per slot, softmax over each augmented row
};

void head_forward(const AugmentedGraph& g, const double* x, std::size_t d_in,
                  const double* w, const double* a, double slope, std::size_t k,
                  HeadState& st) {
    const std::size_t n = g.node_count;
    const std::size_t slots = g.cols.size();
    st.z.assign(n * k, 0.0);
    st.s.assign(n, 0.0);
    st.t.assign(n, 0.0);
    st.u.assign(slots, 0.0);
    st.alpha.assign(slots, 0.0);

    kernels::matmul_nn(x, w, st.z.data(), n, d_in, k);
    kernels::for_each_index(n, [&](std::size_t i) {
        double si = 0.0, ti = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            si += st.z[i * k + c] * a[c];
            ti += st.z[i * k + c] * a[k + c];
        }
        st.s[i] = si;
        st.t[i] = ti;
    });
    kernels::for_each_index(n, [&](std::size_t i) {
        const std::size_t begin = g.offsets[i], end = g.offsets[i + 1];
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t p = begin; p < end; ++p) {
            st.u[p] = st.s[i] + st.t[g.cols[p]];
            row_max = std::max(row_max, leaky(st.u[p], slope));
        }
        double denom = 0.0;
        for (std::size_t p = begin; p < end; ++p) {
            st.alpha[p] = std::exp(leaky(st.u[p], slope) - row_max);
            denom += st.alpha[p];
        }
        for (std::size_t p = begin; p < end; ++p) st.alpha[p] /= denom;
    });
}

}  // namespace

void validate_masks(const RoleMasks& masks, std::size_t node_count) {
    std::vector<std::uint8_t> seen(node_count, 0);
    std::size_t total = 0;
    auto mark = [&](const std::vector<std::uint32_t>& ids, const char* role) {
        for (const auto id : ids) {
            if (id >= node_count) {
                throw ConfigError(std::string("masks: ") + role + " id " + std::to_string(id) +
                                  " out of range for " + std::to_string(node_count) + " nodes");
            }
            if (seen[id]) {
                throw ConfigError(std::string("masks: node ") + std::to_string(id) +
                                  " assigned to more than one role");
            }
            seen[id] = 1;
        }
        total += ids.size();
    };
    mark(masks.train_ids, "train");
    mark(masks.val_ids, "val");
    mark(masks.test_ids, "test");
    if (total != node_count) {
        throw ConfigError("masks: cover " + std::to_string(total) + " of " +
                          std::to_string(node_count) + " nodes");
    }
}

AugmentedGraph AugmentedGraph::from(const KnnGraph& graph) {
    AugmentedGraph aug;
    aug.node_count = graph.node_count;
    aug.offsets.assign(graph.node_count + 1, 0);
    for (std::size_t i = 0; i < graph.node_count; ++i) {
        aug.offsets[i + 1] = aug.offsets[i] + graph.degree(i) + 1;  // +1 self-loop
    }
    // Exceptions must not escape the parallel loops below, so failures only
    // set a flag and the throw happens afterwards with a serial rescan for the
    // first offending edge.
    aug.cols.resize(aug.offsets.back());
    std::atomic<bool> has_self{false};
    kernels::for_each_index(graph.node_count, [&](std::size_t i) {
        const auto src = graph.row(i);
        auto* dst = aug.cols.data() + aug.offsets[i];
        const auto self = static_cast<std::uint32_t>(i);
        if (std::binary_search(src.begin(), src.end(), self)) {
            has_self.store(true, std::memory_order_relaxed);
            std::fill(dst, dst + src.size() + 1, self);
            return;
        }
        std::size_t w = 0;
        bool placed = false;
        for (const auto j : src) {
            if (!placed && j > self) {
                dst[w++] = self;
                placed = true;
            }
            dst[w++] = j;
        }
        if (!placed) dst[w++] = self;
    });
    if (has_self.load()) {
        for (std::size_t i = 0; i < graph.node_count; ++i) {
            const auto src = graph.row(i);
            if (std::binary_search(src.begin(), src.end(), static_cast<std::uint32_t>(i))) {
                throw DataError("AugmentedGraph: node " + std::to_string(i) +
                                " already has a self-loop");
            }
        }
    }

    aug.transpose.resize(aug.cols.size());
    std::atomic<bool> asymmetric{false};
    kernels::for_each_index(graph.node_count, [&](std::size_t i) {
        for (std::size_t p = aug.offsets[i]; p < aug.offsets[i + 1]; ++p) {
            const std::uint32_t j = aug.cols[p];
            const auto row_j = aug.row(j);
            const auto* pos = std::lower_bound(row_j.data(), row_j.data() + row_j.size(),
                                               static_cast<std::uint32_t>(i));
            if (pos == row_j.data() + row_j.size() || *pos != i) {
                asymmetric.store(true, std::memory_order_relaxed);
                aug.transpose[p] = p;
                continue;
            }
            aug.transpose[p] = aug.offsets[j] + static_cast<std::size_t>(pos - row_j.data());
        }
    });
    if (asymmetric.load()) {
        for (std::size_t i = 0; i < graph.node_count; ++i) {
            for (const auto j : graph.row(i)) {
                const auto row_j = graph.row(j);
                if (!std::binary_search(row_j.begin(), row_j.end(),
                                        static_cast<std::uint32_t>(i))) {
                    throw DataError("AugmentedGraph: graph is not symmetric (edge " +
                                    std::to_string(i) + " -> " + std::to_string(j) +
                                    " has no reverse)");
                }
            }
        }
    }
    return aug;
}

GatLayerParams make_gat_layer(std::size_t d_in, std::size_t head_dim, std::size_t heads,
                              double negative_slope, Rng& rng, const std::string& name_prefix) {
    if (d_in < 1 || head_dim < 1 || heads < 1) {
        throw ConfigError("make_gat_layer: dimensions must be >= 1");
    }
    GatLayerParams params;
    params.negative_slope = negative_slope;
    for (std::size_t h = 0; h < heads; ++h) {
        const std::string base = name_prefix + ".head" + std::to_string(h);
        params.weights.push_back(
            ad::glorot_uniform({d_in, head_dim}, d_in, head_dim, rng, base + ".weight"));
        params.attn.push_back(
            ad::glorot_uniform({2 * head_dim}, 2 * head_dim, 1, rng, base + ".attn"));
    }
    return params;
}

std::vector<double> attention_coefficients(const FeatureMatrix& features,
                                           const AugmentedGraph& graph,
                                           const GatLayerParams& params, std::size_t head,
                                           std::size_t node) {
    if (head >= params.heads()) throw ConfigError("attention_coefficients: head out of range");
    if (node >= graph.node_count) throw ConfigError("attention_coefficients: node out of range");
    if (features.cols != params.d_in()) {
        throw DimensionError("attention_coefficients: feature width mismatch");
    }
    const std::size_t k = params.head_dim();
    const double* w = params.weights[head]->data.data();
    const double* a = params.attn[head]->data.data();

    auto project = [&](std::size_t idx, std::vector<double>& z) {
        for (std::size_t c = 0; c < k; ++c) {
            double acc = 0.0;
            for (std::size_t d = 0; d < features.cols; ++d) {
                acc += features.at(idx, d) * w[d * k + c];
            }
            z[c] = acc;
        }
    };

    std::vector<double> zi(k), zj(k);
    project(node, zi);
    double s_i = 0.0;
    for (std::size_t c = 0; c < k; ++c) s_i += zi[c] * a[c];

    const auto row = graph.row(node);
    std::vector<double> logits(row.size());
    for (std::size_t p = 0; p < row.size(); ++p) {
        project(row[p], zj);
        double t_j = 0.0;
        for (std::size_t c = 0; c < k; ++c) t_j += zj[c] * a[k + c];
        logits[p] = leaky(s_i + t_j, params.negative_slope);
    }
    const double row_max = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    std::vector<double> weights(row.size());
    for (std::size_t p = 0; p < row.size(); ++p) {
        weights[p] = std::exp(logits[p] - row_max);
        denom += weights[p];
    }
    for (auto& v : weights) v /= denom;
    return weights;
}

ad::TensorPtr gat_layer_forward(ad::Tape& tape, const ad::TensorPtr& features,
                                const AugmentedGraph& graph, const GatLayerParams& params,
                                HeadCombine combine) {
    const std::size_t n = graph.node_count;
    const std::size_t heads = params.heads();
    const std::size_t k = params.head_dim();
    const std::size_t d_in = params.d_in();
    if (features->shape.size() != 2 || features->rows() != n || features->cols() != d_in) {
        throw DimensionError("gat_layer_forward: features " + ad::shape_str(features->shape) +
                             " do not match " + std::to_string(n) + " nodes x " +
                             std::to_string(d_in));
    }

    const std::size_t out_cols = combine == HeadCombine::concat ? heads * k : k;
    auto out = ad::Tensor::zeros({n, out_cols});
    auto states = std::make_shared<std::vector<HeadState>>(heads);
    const double slope = params.negative_slope;
    const double head_scale = combine == HeadCombine::mean ? 1.0 / static_cast<double>(heads) : 1.0;

    for (std::size_t h = 0; h < heads; ++h) {
        HeadState& st = (*states)[h];
        head_forward(graph, features->data.data(), d_in, params.weights[h]->data.data(),
                     params.attn[h]->data.data(), slope, k, st);
        kernels::for_each_index(n, [&](std::size_t i) {
            for (std::size_t c = 0; c < k; ++c) {
                double acc = 0.0;
                for (std::size_t p = graph.offsets[i]; p < graph.offsets[i + 1]; ++p) {
                    acc += st.alpha[p] * st.z[graph.cols[p] * k + c];
                }
                const std::size_t col = combine == HeadCombine::concat ? h * k + c : c;
                out->data[i * out_cols + col] += head_scale * acc;
            }
        });
    }

    out->requires_grad = layer_wants_grad(tape, features, params);
    if (out->requires_grad) {
        out->grad.assign(out->data.size(), 0.0);
        std::vector<ad::TensorPtr> inputs{features};
        inputs.insert(inputs.end(), params.weights.begin(), params.weights.end());
        inputs.insert(inputs.end(), params.attn.begin(), params.attn.end());
        const GatLayerParams p = params;  // copies shared_ptrs
        // The graph is captured by reference: it must outlive the tape.
        tape.record("gat_layer", std::move(inputs), out, [&graph, features, p, out, states,
                                                          combine, n, heads, k, d_in, slope,
                                                          head_scale, out_cols]() {
            const std::span<const double> gout(out->grad);
            std::vector<double> ghead(n * k);
            std::vector<double> du(graph.cols.size());
            std::vector<double> ds(n), dt(n);
            std::vector<double> dz(n * k);

            for (std::size_t h = 0; h < heads; ++h) {
                const HeadState& st = (*states)[h];
                const double* a = p.attn[h]->data.data();

                // slice this head's upstream gradient
                kernels::for_each_index(n, [&](std::size_t i) {
                    for (std::size_t c = 0; c < k; ++c) {
                        const std::size_t col = combine == HeadCombine::concat ? h * k + c : c;
                        ghead[i * k + c] = head_scale * gout[i * out_cols + col];
                    }
                });

                // attention backward per row: softmax then LeakyReLU
                kernels::for_each_index(n, [&](std::size_t i) {
                    const std::size_t begin = graph.offsets[i], end = graph.offsets[i + 1];
                    double dot = 0.0;
                    for (std::size_t q = begin; q < end; ++q) {
                        const std::uint32_t j = graph.cols[q];
                        double dalpha = 0.0;
                        for (std::size_t c = 0; c < k; ++c) {
                            dalpha += ghead[i * k + c] * st.z[j * k + c];
                        }
                        du[q] = dalpha;  // stash dalpha
                        dot += st.alpha[q] * dalpha;
                    }
                    double dsi = 0.0;
                    for (std::size_t q = begin; q < end; ++q) {
                        const double de = st.alpha[q] * (du[q] - dot);
                        du[q] = de * leaky_grad(st.u[q], slope);
                        dsi += du[q];
                    }
                    ds[i] = dsi;
                });

                // transpose gathers keep writes owned by the target node
                kernels::for_each_index(n, [&](std::size_t j) {
                    const std::size_t begin = graph.offsets[j], end = graph.offsets[j + 1];
                    double dtj = 0.0;
                    for (std::size_t c = 0; c < k; ++c) dz[j * k + c] = 0.0;
                    for (std::size_t q = begin; q < end; ++q) {
                        const std::size_t pslot = graph.transpose[q];
                        const std::uint32_t i = graph.cols[q];
                        dtj += du[pslot];
                        const double alpha = st.alpha[pslot];
                        for (std::size_t c = 0; c < k; ++c) {
                            dz[j * k + c] += alpha * ghead[i * k + c];
                        }
                    }
                    dt[j] = dtj;
                    for (std::size_t c = 0; c < k; ++c) {
                        dz[j * k + c] += ds[j] * a[c] + dt[j] * a[k + c];
                    }
                });

                if (p.attn[h]->requires_grad) {
                    auto& agrad = p.attn[h]->grad;
                    kernels::for_each_index(2 * k, [&](std::size_t c) {
                        const bool src_half = c < k;
                        double acc = 0.0;
                        for (std::size_t i = 0; i < n; ++i) {
                            acc += (src_half ? ds[i] : dt[i]) * st.z[i * k + (src_half ? c : c - k)];
                        }
                        agrad[c] += acc;
                    });
                }
                if (p.weights[h]->requires_grad) {
                    kernels::matmul_tn(features->data.data(), dz.data(),
                                       p.weights[h]->grad.data(), d_in, n, k, true);
                }
                if (features->requires_grad) {
                    kernels::matmul_nt(dz.data(), p.weights[h]->data.data(),
                                       features->grad.data(), n, k, d_in, true);
                }
            }
        });
    }
    return out;
}

std::vector<ad::TensorPtr> GatModel::params() const {
    std::vector<ad::TensorPtr> out;
    for (const auto* layer : {&layer1, &layer2}) {
        for (std::size_t h = 0; h < layer->heads(); ++h) {
            out.push_back(layer->weights[h]);
            out.push_back(layer->attn[h]);
        }
    }
    out.push_back(classifier.weight);
    out.push_back(classifier.bias);
    return out;
}

GatModel make_gat_model(const GatTopology& topology, Rng& rng) {
    if (topology.label_count < 2) throw ConfigError("make_gat_model: need at least 2 classes");
    GatModel model;
    model.topology = topology;
    model.layer1 = make_gat_layer(topology.input_dim, topology.head_dim, topology.heads,
                                  topology.negative_slope, rng, "layer1");
    model.layer2 = make_gat_layer(topology.heads * topology.head_dim, topology.head_dim,
                                  topology.heads, topology.negative_slope, rng, "layer2");
    model.classifier =
        ad::DenseLayer(topology.head_dim, topology.label_count, rng, "classifier");
    return model;
}

ad::TensorPtr gat_model_forward(ad::Tape& tape, const GatModel& model,
                                const AugmentedGraph& graph, const ad::TensorPtr& features) {
    auto h1 = ad::relu(tape, gat_layer_forward(tape, features, graph, model.layer1,
                                               HeadCombine::concat));
    auto h2 = gat_layer_forward(tape, h1, graph, model.layer2, HeadCombine::mean);
    return ad::dense_forward(tape, h2, model.classifier);
}

namespace {

double accuracy_over(const ad::TensorPtr& logits, const std::vector<int>& labels,
                     const std::vector<std::uint32_t>& ids) {
    if (ids.empty()) return 0.0;
    const std::size_t c = logits->cols();
    std::size_t hits = 0;
    for (const auto id : ids) {
        const double* row = logits->data.data() + id * c;
        std::size_t arg = 0;
        for (std::size_t j = 1; j < c; ++j) {
            if (row[j] > row[arg]) arg = j;
        }
        if (static_cast<int>(arg) == labels[id]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ids.size());
}

}  // namespace

GatModel train_gat(const KnnGraph& graph, const FeatureMatrix& features,
                   const std::vector<int>& labels, const RoleMasks& masks,
                   const GatTrainConfig& cfg) {
    const std::size_t n = graph.node_count;
    if (features.rows != n) {
        throw DimensionError("train_gat: " + std::to_string(features.rows) + " feature rows for " +
                             std::to_string(n) + " graph nodes");
    }
    if (features.cols != cfg.topology.input_dim) {
        throw DimensionError("train_gat: feature width " + std::to_string(features.cols) +
                             " != configured input_dim " + std::to_string(cfg.topology.input_dim));
    }
    if (labels.size() != n) throw DimensionError("train_gat: label count mismatch");
    if (cfg.epochs < 1 || cfg.batch < 1) throw ConfigError("train_gat: epochs and batch must be >= 1");
    if (cfg.lr < 0.0) throw ConfigError("train_gat: learning rate must be >= 0");
    validate_masks(masks, n);
    const std::size_t label_count = cfg.topology.label_count;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= label_count) {
            throw DataError("train_gat: label " + std::to_string(labels[i]) + " at node " +
                            std::to_string(i) + " outside [0, " + std::to_string(label_count) + ")");
        }
    }
    if (masks.train_ids.empty()) throw ConfigError("train_gat: empty train mask");

    Rng rng(cfg.seed);
    GatModel model = make_gat_model(cfg.topology, rng);

    std::vector<std::size_t> class_count(label_count, 0);
    for (const auto id : masks.train_ids) ++class_count[static_cast<std::size_t>(labels[id])];
    for (std::size_t c = 0; c < label_count; ++c) {
        if (class_count[c] == 0) {
            const std::string msg = "class '" + LabelMap::name_of(static_cast<int>(c)) +
                                    "' absent from train split; its metrics will be zero";
            model.warnings.push_back(msg);
            std::cerr << "[train_gat] warning: " << msg << '\n';
        }
    }
    std::vector<double> weights(label_count, 0.0);
    if (cfg.class_weights) {
        for (std::size_t c = 0; c < label_count; ++c) {
            weights[c] = class_count[c] > 0 ? static_cast<double>(masks.train_ids.size()) /
                                                  (static_cast<double>(label_count) *
                                                   static_cast<double>(class_count[c]))
                                            : 0.0;
        }
    }
    const std::vector<double>* weights_ptr = cfg.class_weights ? &weights : nullptr;

    const AugmentedGraph aug = AugmentedGraph::from(graph);
    auto x = ad::Tensor::from_data({n, features.cols}, features.data)->named("features");
    auto params = model.params();
    ad::AdamState adam(params, ad::AdamConfig{.lr = cfg.lr});

    std::vector<std::uint32_t> order = masks.train_ids;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t count = std::min(cfg.batch, order.size() - start);
            const std::vector<std::uint32_t> batch(order.begin() + start,
                                                   order.begin() + start + count);
            ad::Tape tape;
            auto logits = gat_model_forward(tape, model, aug, x);
            auto loss = ad::cross_entropy_mean(tape, logits, labels, batch, weights_ptr);
            if (!std::isfinite(loss->value())) {
                throw NumericError("train_gat: non-finite loss at epoch " +
                                   std::to_string(epoch + 1));
            }
            for (auto& param : params) param->zero_grad();
            tape.backward(loss);
            adam.step();
            loss_sum += loss->value() * static_cast<double>(count);
        }

        GatEpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(order.size());
        ad::Tape eval_tape(false);
        auto logits = gat_model_forward(eval_tape, model, aug, x);
        stats.train_acc = accuracy_over(logits, labels, masks.train_ids);
        if (!masks.val_ids.empty()) {
            stats.val_loss =
                ad::cross_entropy_mean(eval_tape, logits, labels, masks.val_ids, weights_ptr)
                    ->value();
            stats.val_acc = accuracy_over(logits, labels, masks.val_ids);
        }
        model.history.push_back(stats);
    }
    return model;
}

GatPrediction predict(const GatModel& model, const KnnGraph& graph, const FeatureMatrix& features,
                      const std::vector<std::uint32_t>& node_ids) {
    const std::size_t n = graph.node_count;
    for (const auto id : node_ids) {
        if (id >= n) {
            throw ConfigError("predict: node id " + std::to_string(id) + " out of range");
        }
    }
    const AugmentedGraph aug = AugmentedGraph::from(graph);
    ad::Tape tape(false);
    auto x = ad::Tensor::from_data({n, features.cols}, features.data);
    auto probs = ad::softmax_rows(tape, gat_model_forward(tape, model, aug, x));

    const std::size_t c = probs->cols();
    GatPrediction out;
    out.classes.resize(node_ids.size());
    out.probs = FeatureMatrix(node_ids.size(), c);
    for (std::size_t r = 0; r < node_ids.size(); ++r) {
        const double* row = probs->data.data() + node_ids[r] * c;
        std::size_t arg = 0;
        for (std::size_t j = 0; j < c; ++j) {
            out.probs.at(r, j) = row[j];
            if (row[j] > row[arg]) arg = j;
        }
        out.classes[r] = static_cast<int>(arg);
    }
    return out;
}

void save_history_csv(const std::string& path, const std::vector<GatEpochStats>& history) {
    std::ofstream out(path);
    if (!out) throw DataError("save_history_csv: cannot open '" + path + "'");
    out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
    out << std::setprecision(17);
    for (std::size_t e = 0; e < history.size(); ++e) {
        out << (e + 1) << ',' << history[e].train_loss << ',' << history[e].train_acc << ','
            << history[e].val_loss << ',' << history[e].val_acc << '\n';
    }
    if (!out) throw DataError("save_history_csv: write failed for '" + path + "'");
}

Checkpoint to_checkpoint(const GatModel& model) {
    Checkpoint ckpt;
    ckpt.model_kind = "gat";
    std::vector<double> tl, ta, vl, va;
    for (const auto& e : model.history) {
        tl.push_back(e.train_loss);
        ta.push_back(e.train_acc);
        vl.push_back(e.val_loss);
        va.push_back(e.val_acc);
    }
    ckpt.meta = {{"input_dim", model.topology.input_dim},
                 {"heads", model.topology.heads},
                 {"head_dim", model.topology.head_dim},
                 {"label_count", model.topology.label_count},
                 {"negative_slope", model.topology.negative_slope},
                 {"train_loss", tl},
                 {"train_acc", ta},
                 {"val_loss", vl},
                 {"val_acc", va},
                 {"warnings", model.warnings}};
    auto push_layer = [&](const GatLayerParams& layer, const std::string& prefix) {
        for (std::size_t h = 0; h < layer.heads(); ++h) {
            const std::string base = prefix + ".head" + std::to_string(h);
            ckpt.params.push_back(
                {base + ".weight", layer.weights[h]->shape, layer.weights[h]->data});
            ckpt.params.push_back({base + ".attn", layer.attn[h]->shape, layer.attn[h]->data});
        }
    };
    push_layer(model.layer1, "layer1");
    push_layer(model.layer2, "layer2");
    ckpt.params.push_back(
        {"classifier.weight", model.classifier.weight->shape, model.classifier.weight->data});
    ckpt.params.push_back(
        {"classifier.bias", model.classifier.bias->shape, model.classifier.bias->data});
    return ckpt;
}

GatModel gat_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.model_kind != "gat") {
        throw DataError("gat_from_checkpoint: checkpoint holds '" + ckpt.model_kind + "'");
    }
    GatModel model;
    model.topology.input_dim = ckpt.meta.at("input_dim").get<std::size_t>();
    model.topology.heads = ckpt.meta.at("heads").get<std::size_t>();
    model.topology.head_dim = ckpt.meta.at("head_dim").get<std::size_t>();
    model.topology.label_count = ckpt.meta.at("label_count").get<std::size_t>();
    model.topology.negative_slope = ckpt.meta.at("negative_slope").get<double>();

    auto pull_layer = [&](const std::string& prefix) {
        GatLayerParams layer;
        layer.negative_slope = model.topology.negative_slope;
        for (std::size_t h = 0; h < model.topology.heads; ++h) {
            const std::string base = prefix + ".head" + std::to_string(h);
            const NamedBuffer& w = ckpt.find(base + ".weight");
            const NamedBuffer& a = ckpt.find(base + ".attn");
            layer.weights.push_back(
                ad::Tensor::from_data(w.shape, w.values, true)->named(base + ".weight"));
            layer.attn.push_back(
                ad::Tensor::from_data(a.shape, a.values, true)->named(base + ".attn"));
        }
        return layer;
    };
    model.layer1 = pull_layer("layer1");
    model.layer2 = pull_layer("layer2");
    const NamedBuffer& cw = ckpt.find("classifier.weight");
    const NamedBuffer& cb = ckpt.find("classifier.bias");
    model.classifier.weight =
        ad::Tensor::from_data(cw.shape, cw.values, true)->named("classifier.weight");
    model.classifier.bias =
        ad::Tensor::from_data(cb.shape, cb.values, true)->named("classifier.bias");

    if (ckpt.meta.contains("train_loss")) {
        const auto tl = ckpt.meta["train_loss"].get<std::vector<double>>();
        const auto ta = ckpt.meta["train_acc"].get<std::vector<double>>();
        const auto vl = ckpt.meta["val_loss"].get<std::vector<double>>();
        const auto va = ckpt.meta["val_acc"].get<std::vector<double>>();
        for (std::size_t e = 0; e < tl.size(); ++e) {
            model.history.push_back({tl[e], ta[e], vl[e], va[e]});
        }
    }
    if (ckpt.meta.contains("warnings")) {
        model.warnings = ckpt.meta["warnings"].get<std::vector<std::string>>();
    }
    return model;
}

}  // namespace flowgat

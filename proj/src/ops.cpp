#include "flowgat/ops.hpp"

#include <algorithm>
#include <cmath>

#include "flowgat/kernels.hpp"

namespace flowgat::ad {

namespace {

void require_rank2(const TensorPtr& t, const char* what) {
    if (t->shape.size() != 2) {
        throw DimensionError(std::string(what) + " requires a rank-2 tensor, got shape " +
                             shape_str(t->shape));
    }
}

void require_finite(const TensorPtr& t, const char* what) {
    for (const double v : t->data) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite element in ") + what + " input");
        }
    }
}

bool want_grad(const Tape& tape, std::initializer_list<TensorPtr> inputs) {
    if (!tape.recording()) {
        return false;
    }
    for (const auto& t : inputs) {
        if (t->requires_grad) {
            return true;
        }
    }
    return false;
}

}  // namespace

TensorPtr glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                         Rng& rng, std::string name) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    auto t = Tensor::zeros(std::move(shape), true);
    for (auto& x : t->data) {
        x = rng.uniform(-limit, limit);
    }
    t->name = std::move(name);
    return t;
}

DenseLayer::DenseLayer(std::size_t d_in, std::size_t d_out, Rng& rng,
                       const std::string& name_prefix) {
    if (d_in < 1 || d_out < 1) {
        throw ConfigError("dense layer dimensions must be >= 1");
    }
    weight = glorot_uniform({d_in, d_out}, d_in, d_out, rng, name_prefix + ".weight");
    bias = Tensor::zeros({d_out}, true);
    bias->name = name_prefix + ".bias";
}

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    if (a->cols() != b->rows()) {
        throw DimensionError("matmul shape mismatch: " + shape_str(a->shape) + " vs " +
                             shape_str(b->shape));
    }
    const std::size_t m = a->rows(), p = a->cols(), n = b->cols();
    const bool rg = want_grad(tape, {a, b});
    auto out = Tensor::zeros({m, n}, rg);
    kernels::matmul_nn(a->data.data(), b->data.data(), out->data.data(), m, p, n);
    tape.record("matmul", {a, b}, out, [a, b, out, m, p, n] {
        if (a->requires_grad) {
            kernels::matmul_nt(out->grad.data(), b->data.data(), a->grad.data(), m, n, p, true);
        }
        if (b->requires_grad) {
            kernels::matmul_tn(a->data.data(), out->grad.data(), b->grad.data(), p, m, n, true);
        }
    });
    return out;
}

TensorPtr add_bias(Tape& tape, const TensorPtr& x, const TensorPtr& bias) {
    require_rank2(x, "add_bias");
    if (bias->size() != x->cols()) {
        throw DimensionError("bias shape " + shape_str(bias->shape) + " does not match row width " +
                             std::to_string(x->cols()));
    }
    const std::size_t rows = x->rows(), cols = x->cols();
    const bool rg = want_grad(tape, {x, bias});
    auto out = Tensor::zeros({rows, cols}, rg);
    kernels::for_each_index(rows, [&](std::size_t i) {
        const double* xr = x->data.data() + i * cols;
        double* yr = out->data.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) {
            yr[j] = xr[j] + bias->data[j];
        }
    });
    tape.record("add_bias", {x, bias}, out, [x, bias, out, rows, cols] {
        if (x->requires_grad) {
            for (std::size_t i = 0; i < rows * cols; ++i) {
                x->grad[i] += out->grad[i];
            }
        }
        if (bias->requires_grad) {
            kernels::for_each_index(cols, [&](std::size_t j) {
                double sum = 0.0;
                for (std::size_t i = 0; i < rows; ++i) {
                    sum += out->grad[i * cols + j];
                }
                bias->grad[j] += sum;
            });
        }
    });
    return out;
}

TensorPtr dense_forward(Tape& tape, const TensorPtr& input, const DenseLayer& layer) {
    require_rank2(input, "dense_forward");
    if (input->cols() != layer.d_in()) {
        throw DimensionError("dense_forward input shape " + shape_str(input->shape) +
                             " does not match weight shape " + shape_str(layer.weight->shape));
    }
    return add_bias(tape, matmul(tape, input, layer.weight), layer.bias);
}

TensorPtr relu(Tape& tape, const TensorPtr& x) {
    require_finite(x, "relu");
    const bool rg = want_grad(tape, {x});
    auto out = Tensor::zeros(x->shape, rg);
    for (std::size_t i = 0; i < x->size(); ++i) {
        out->data[i] = x->data[i] > 0.0 ? x->data[i] : 0.0;
    }
    tape.record("relu", {x}, out, [x, out] {
        if (!x->requires_grad) {
            return;
        }
        for (std::size_t i = 0; i < x->size(); ++i) {
            if (x->data[i] > 0.0) {
                x->grad[i] += out->grad[i];
            }
        }
    });
    return out;
}

TensorPtr softmax_rows(Tape& tape, const TensorPtr& x) {
    require_rank2(x, "softmax_rows");
    require_finite(x, "softmax_rows");
    const std::size_t rows = x->rows(), cols = x->cols();
    const bool rg = want_grad(tape, {x});
    auto out = Tensor::zeros(x->shape, rg);
    kernels::for_each_index(rows, [&](std::size_t i) {
        const double* xr = x->data.data() + i * cols;
        double* yr = out->data.data() + i * cols;
        double mx = xr[0];
        for (std::size_t j = 1; j < cols; ++j) {
            mx = std::max(mx, xr[j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            yr[j] = std::exp(xr[j] - mx);
            sum += yr[j];
        }
        for (std::size_t j = 0; j < cols; ++j) {
            yr[j] /= sum;
        }
    });
    tape.record("softmax_rows", {x}, out, [x, out, rows, cols] {
        if (!x->requires_grad) {
            return;
        }
        kernels::for_each_index(rows, [&](std::size_t i) {
            const double* y = out->data.data() + i * cols;
            const double* gy = out->grad.data() + i * cols;
            double dot = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
                dot += gy[j] * y[j];
            }
            double* gx = x->grad.data() + i * cols;
            for (std::size_t j = 0; j < cols; ++j) {
                gx[j] += y[j] * (gy[j] - dot);
            }
        });
    });
    return out;
}

TensorPtr activate(Tape& tape, const TensorPtr& input, Activation kind) {
    switch (kind) {
        case Activation::relu:
            return relu(tape, input);
        case Activation::softmax_rows:
            return softmax_rows(tape, input);
    }
    throw ConfigError("unknown activation kind");
}

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    if (a->shape != b->shape) {
        throw DimensionError("add shape mismatch: " + shape_str(a->shape) + " vs " +
                             shape_str(b->shape));
    }
    const bool rg = want_grad(tape, {a, b});
    auto out = Tensor::zeros(a->shape, rg);
    for (std::size_t i = 0; i < a->size(); ++i) {
        out->data[i] = a->data[i] + b->data[i];
    }
    tape.record("add", {a, b}, out, [a, b, out] {
        if (a->requires_grad) {
            for (std::size_t i = 0; i < a->size(); ++i) {
                a->grad[i] += out->grad[i];
            }
        }
        if (b->requires_grad) {
            for (std::size_t i = 0; i < b->size(); ++i) {
                b->grad[i] += out->grad[i];
            }
        }
    });
    return out;
}

TensorPtr clamp(Tape& tape, const TensorPtr& x, double lo, double hi) {
    if (lo > hi) {
        throw ConfigError("clamp: lo > hi");
    }
    const bool rg = want_grad(tape, {x});
    auto out = Tensor::zeros(x->shape, rg);
    for (std::size_t i = 0; i < x->size(); ++i) {
        out->data[i] = std::min(std::max(x->data[i], lo), hi);
    }
    tape.record("clamp", {x}, out, [x, out, lo, hi] {
        if (!x->requires_grad) {
            return;
        }
        for (std::size_t i = 0; i < x->size(); ++i) {
            if (x->data[i] > lo && x->data[i] < hi) {
                x->grad[i] += out->grad[i];
            }
        }
    });
    return out;
}

TensorPtr reparameterize(Tape& tape, const TensorPtr& mu, const TensorPtr& logvar,
                         const std::vector<double>& eps) {
    if (mu->shape != logvar->shape || eps.size() != mu->size()) {
        throw DimensionError("reparameterize: mu " + shape_str(mu->shape) + ", logvar " +
                             shape_str(logvar->shape) + ", eps length " +
                             std::to_string(eps.size()));
    }
    const bool rg = want_grad(tape, {mu, logvar});
    auto out = Tensor::zeros(mu->shape, rg);
    for (std::size_t i = 0; i < mu->size(); ++i) {
        out->data[i] = mu->data[i] + std::exp(0.5 * logvar->data[i]) * eps[i];
    }
    tape.record("reparameterize", {mu, logvar}, out, [mu, logvar, out, eps] {
        if (mu->requires_grad) {
            for (std::size_t i = 0; i < mu->size(); ++i) {
                mu->grad[i] += out->grad[i];
            }
        }
        if (logvar->requires_grad) {
            for (std::size_t i = 0; i < logvar->size(); ++i) {
                logvar->grad[i] +=
                    out->grad[i] * eps[i] * 0.5 * std::exp(0.5 * logvar->data[i]);
            }
        }
    });
    return out;
}

TensorPtr mse_loss(Tape& tape, const TensorPtr& pred, const TensorPtr& target) {
    if (pred->shape != target->shape) {
        throw DimensionError("mse_loss shape mismatch: " + shape_str(pred->shape) + " vs " +
                             shape_str(target->shape));
    }
    const double inv = 1.0 / static_cast<double>(pred->size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pred->size(); ++i) {
        const double d = pred->data[i] - target->data[i];
        acc += d * d;
    }
    const bool rg = want_grad(tape, {pred});
    auto out = Tensor::scalar(acc * inv, rg);
    tape.record("mse_loss", {pred, target}, out, [pred, target, out, inv] {
        if (!pred->requires_grad) {
            return;
        }
        const double g = out->grad[0];
        for (std::size_t i = 0; i < pred->size(); ++i) {
            pred->grad[i] += g * 2.0 * (pred->data[i] - target->data[i]) * inv;
        }
    });
    return out;
}

TensorPtr kl_gaussian_standard_mean(Tape& tape, const TensorPtr& mu, const TensorPtr& logvar) {
    require_rank2(mu, "kl_gaussian_standard_mean");
    if (mu->shape != logvar->shape) {
        throw DimensionError("kl shape mismatch: " + shape_str(mu->shape) + " vs " +
                             shape_str(logvar->shape));
    }
    const std::size_t batch = mu->rows();
    const double inv_b = 1.0 / static_cast<double>(batch);
    double acc = 0.0;
    for (std::size_t i = 0; i < mu->size(); ++i) {
        const double m = mu->data[i], lv = logvar->data[i];
        acc += 0.5 * (m * m + std::exp(lv) - 1.0 - lv);
    }
    const bool rg = want_grad(tape, {mu, logvar});
    auto out = Tensor::scalar(acc * inv_b, rg);
    tape.record("kl_gaussian_standard_mean", {mu, logvar}, out, [mu, logvar, out, inv_b] {
        const double g = out->grad[0];
        if (mu->requires_grad) {
            for (std::size_t i = 0; i < mu->size(); ++i) {
                mu->grad[i] += g * mu->data[i] * inv_b;
            }
        }
        if (logvar->requires_grad) {
            for (std::size_t i = 0; i < logvar->size(); ++i) {
                logvar->grad[i] += g * 0.5 * (std::exp(logvar->data[i]) - 1.0) * inv_b;
            }
        }
    });
    return out;
}

TensorPtr cross_entropy_mean(Tape& tape, const TensorPtr& logits, const std::vector<int>& labels,
                             const std::vector<std::uint32_t>& ids,
                             const std::vector<double>* class_weights) {
    require_rank2(logits, "cross_entropy_mean");
    const std::size_t n = logits->rows(), c = logits->cols();
    if (labels.size() != n) {
        throw DimensionError("cross_entropy_mean: " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(n) + " logit rows");
    }
    if (ids.empty()) {
        throw ConfigError("cross_entropy_mean: empty id set");
    }
    if (class_weights && class_weights->size() != c) {
        throw DimensionError("cross_entropy_mean: class weight count mismatch");
    }
    double loss_acc = 0.0;
    double weight_acc = 0.0;
    for (const auto id : ids) {
        if (id >= n) {
            throw ConfigError("cross_entropy_mean: node id out of range");
        }
        const int y = labels[id];
        if (y < 0 || static_cast<std::size_t>(y) >= c) {
            throw DataError("cross_entropy_mean: label out of range for node " +
                            std::to_string(id));
        }
        const double* row = logits->data.data() + static_cast<std::size_t>(id) * c;
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) {
            mx = std::max(mx, row[j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            sum += std::exp(row[j] - mx);
        }
        const double lse = mx + std::log(sum);
        const double w = class_weights ? (*class_weights)[static_cast<std::size_t>(y)] : 1.0;
        loss_acc += w * (lse - row[y]);
        weight_acc += w;
    }
    const bool rg = want_grad(tape, {logits});
    auto out = Tensor::scalar(loss_acc / weight_acc, rg);
    auto weights_copy =
        class_weights ? std::make_shared<std::vector<double>>(*class_weights) : nullptr;
    tape.record("cross_entropy_mean", {logits}, out,
                [logits, out, labels, ids, weights_copy, c, weight_acc] {
                    if (!logits->requires_grad) {
                        return;
                    }
                    const double g = out->grad[0] / weight_acc;
                    kernels::for_each_index(ids.size(), [&](std::size_t t) {
                        const auto id = ids[t];
                        const int y = labels[id];
                        const double* row = logits->data.data() + static_cast<std::size_t>(id) * c;
                        double* grow = logits->grad.data() + static_cast<std::size_t>(id) * c;
                        double mx = row[0];
                        for (std::size_t j = 1; j < c; ++j) {
                            mx = std::max(mx, row[j]);
                        }
                        double sum = 0.0;
                        for (std::size_t j = 0; j < c; ++j) {
                            sum += std::exp(row[j] - mx);
                        }
                        const double w =
                            weights_copy ? (*weights_copy)[static_cast<std::size_t>(y)] : 1.0;
                        for (std::size_t j = 0; j < c; ++j) {
                            const double p = std::exp(row[j] - mx) / sum;
                            const double ind = static_cast<std::size_t>(y) == j ? 1.0 : 0.0;
                            grow[j] += g * w * (p - ind);
                        }
                    });
                });
    return out;
}

TensorPtr scale(Tape& tape, const TensorPtr& x, double factor) {
    if (!std::isfinite(factor)) {
        throw NumericError("scale: non-finite factor");
    }
    const bool rg = want_grad(tape, {x});
    auto out = Tensor::zeros(x->shape, rg);
    for (std::size_t i = 0; i < x->size(); ++i) {
        out->data[i] = factor * x->data[i];
    }
    tape.record("scale", {x}, out, [x, out, factor] {
        if (!x->requires_grad) {
            return;
        }
        for (std::size_t i = 0; i < x->size(); ++i) {
            x->grad[i] += factor * out->grad[i];
        }
    });
    return out;
}

TensorPtr weighted_sum(Tape& tape, const TensorPtr& x, const std::vector<double>& coeffs) {
    if (coeffs.size() != x->size()) {
        throw DimensionError("weighted_sum: coefficient count mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < x->size(); ++i) {
        acc += coeffs[i] * x->data[i];
    }
    const bool rg = want_grad(tape, {x});
    auto out = Tensor::scalar(acc, rg);
    tape.record("weighted_sum", {x}, out, [x, out, coeffs] {
        if (!x->requires_grad) {
            return;
        }
        const double g = out->grad[0];
        for (std::size_t i = 0; i < x->size(); ++i) {
            x->grad[i] += g * coeffs[i];
        }
    });
    return out;
}

}  // namespace flowgat::ad

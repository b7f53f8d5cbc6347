#include "flowgat/dimred.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowgat/errors.hpp"
#include "flowgat/kernels.hpp"
#include "flowgat/optim.hpp"

namespace flowgat {

namespace {

constexpr double kLogvarClamp = 10.0;

ad::TensorPtr tensor_from_matrix(const FeatureMatrix& m) {
    return ad::Tensor::from_data({m.rows, m.cols}, m.data);
}

ad::TensorPtr tensor_from_rows(const FeatureMatrix& m, std::span<const std::size_t> ids) {
    std::vector<double> values(ids.size() * m.cols);
    for (std::size_t r = 0; r < ids.size(); ++r) {
        const auto src = m.row(ids[r]);
        std::copy(src.begin(), src.end(), values.begin() + r * m.cols);
    }
    return ad::Tensor::from_data({ids.size(), m.cols}, std::move(values));
}

FeatureMatrix matrix_from_tensor(const ad::TensorPtr& t) {
    FeatureMatrix out(t->rows(), t->cols());
    out.data = t->data;
    return out;
}

void check_train_config(const FeatureMatrix& train, const TrainConfig& cfg, const char* who) {
    const std::string where(who);
    if (cfg.epochs < 1) throw ConfigError(where + ": epochs must be >= 1");
    if (cfg.batch < 1) throw ConfigError(where + ": batch must be >= 1");
    if (cfg.latent_dim < 1 || cfg.hidden_dim < 1) {
        throw ConfigError(where + ": layer widths must be >= 1");
    }
    if (cfg.lr < 0.0) throw ConfigError(where + ": learning rate must be >= 0");
    if (train.cols < cfg.latent_dim) {
        throw ConfigError(where + ": input width " + std::to_string(train.cols) +
                          " is narrower than latent_dim " + std::to_string(cfg.latent_dim));
    }
    if (train.rows < cfg.batch) {
        throw ConfigError(where + ": need at least one full batch (" + std::to_string(cfg.batch) +
                          " rows), got " + std::to_string(train.rows));
    }
}

ad::TensorPtr ae_forward(ad::Tape& tape, const AeModel& model, const ad::TensorPtr& x) {
    auto h = ad::relu(tape, ad::dense_forward(tape, x, model.encoder[0]));
    auto z = ad::dense_forward(tape, h, model.encoder[1]);
    auto d = ad::relu(tape, ad::dense_forward(tape, z, model.decoder[0]));
    return ad::dense_forward(tape, d, model.decoder[1]);
}

struct VaeForward {
    ad::TensorPtr recon_loss;
    ad::TensorPtr kl_loss;
    ad::TensorPtr total;
};

VaeForward vae_forward(ad::Tape& tape, const VaeModel& model, const ad::TensorPtr& x,
                       const std::vector<double>& eps) {
    auto trunk = ad::relu(tape, ad::dense_forward(tape, x, model.encoder_trunk[0]));
    auto mu = ad::dense_forward(tape, trunk, model.mu_head);
    auto logvar = ad::clamp(tape, ad::dense_forward(tape, trunk, model.logvar_head),
                            -kLogvarClamp, kLogvarClamp);
    auto z = ad::reparameterize(tape, mu, logvar, eps);
    auto d = ad::relu(tape, ad::dense_forward(tape, z, model.decoder[0]));
    auto recon = ad::dense_forward(tape, d, model.decoder[1]);

    VaeForward out;
    // Plain ELBO: the reconstruction term is the per-sample sum of squared
    // errors (batch-mean), which keeps it commensurate with the per-sample KL.
    out.recon_loss = ad::scale(tape, ad::mse_loss(tape, recon, x),
                               static_cast<double>(x->cols()));
    out.kl_loss = ad::kl_gaussian_standard_mean(tape, mu, logvar);
    out.total = ad::add(tape, out.recon_loss, out.kl_loss);
    return out;
}

template <typename BatchFn>
void run_epochs(std::size_t n_rows, const TrainConfig& cfg, Rng& rng, BatchFn&& batch_fn) {
    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n_rows; start += cfg.batch) {
            const std::size_t count = std::min(cfg.batch, n_rows - start);
            batch_fn(epoch, std::span<const std::size_t>(order.data() + start, count));
        }
    }
}

}  // namespace

ReducerKind parse_reducer(const std::string& name) {
    if (name == "ae") return ReducerKind::ae_encoder;
    if (name == "vae") return ReducerKind::vae_encoder;
    if (name == "pca") return ReducerKind::pca;
    throw ConfigError("unknown reducer '" + name + "' (expected ae, vae, or pca)");
}

const char* reducer_name(ReducerKind kind) {
    switch (kind) {
        case ReducerKind::ae_encoder: return "ae";
        case ReducerKind::vae_encoder: return "vae";
        case ReducerKind::pca: return "pca";
    }
    throw ConfigError("reducer_name: bad enum value");
}

std::vector<ad::TensorPtr> AeModel::params() const {
    std::vector<ad::TensorPtr> out;
    for (const auto& layer : encoder) {
        out.push_back(layer.weight);
        out.push_back(layer.bias);
    }
    for (const auto& layer : decoder) {
        out.push_back(layer.weight);
        out.push_back(layer.bias);
    }
    return out;
}

std::vector<ad::TensorPtr> VaeModel::params() const {
    std::vector<ad::TensorPtr> out;
    for (const auto& layer : encoder_trunk) {
        out.push_back(layer.weight);
        out.push_back(layer.bias);
    }
    out.push_back(mu_head.weight);
    out.push_back(mu_head.bias);
    out.push_back(logvar_head.weight);
    out.push_back(logvar_head.bias);
    for (const auto& layer : decoder) {
        out.push_back(layer.weight);
        out.push_back(layer.bias);
    }
    return out;
}

AeModel make_autoencoder(std::size_t input_dim, const TrainConfig& cfg, Rng& rng) {
    AeModel model;
    model.encoder.emplace_back(input_dim, cfg.hidden_dim, rng, "encoder.0");
    model.encoder.emplace_back(cfg.hidden_dim, cfg.latent_dim, rng, "encoder.1");
    model.decoder.emplace_back(cfg.latent_dim, cfg.hidden_dim, rng, "decoder.0");
    model.decoder.emplace_back(cfg.hidden_dim, input_dim, rng, "decoder.1");
    return model;
}

VaeModel make_vae(std::size_t input_dim, const TrainConfig& cfg, Rng& rng) {
    VaeModel model;
    model.encoder_trunk.emplace_back(input_dim, cfg.hidden_dim, rng, "encoder_trunk.0");
    model.mu_head = ad::DenseLayer(cfg.hidden_dim, cfg.latent_dim, rng, "mu_head");
    model.logvar_head = ad::DenseLayer(cfg.hidden_dim, cfg.latent_dim, rng, "logvar_head");
    model.decoder.emplace_back(cfg.latent_dim, cfg.hidden_dim, rng, "decoder.0");
    model.decoder.emplace_back(cfg.hidden_dim, input_dim, rng, "decoder.1");
    return model;
}

AeModel train_autoencoder(const FeatureMatrix& train, const TrainConfig& cfg) {
    check_train_config(train, cfg, "train_autoencoder");
    Rng rng(cfg.seed);
    AeModel model = make_autoencoder(train.cols, cfg, rng);
    auto params = model.params();
    ad::AdamState adam(params, ad::AdamConfig{.lr = cfg.lr});

    std::vector<double> epoch_loss(cfg.epochs, 0.0);
    run_epochs(train.rows, cfg, rng, [&](std::size_t epoch, std::span<const std::size_t> ids) {
        auto x = tensor_from_rows(train, ids);
        ad::Tape tape;
        auto loss = ad::mse_loss(tape, ae_forward(tape, model, x), x);
        if (!std::isfinite(loss->value())) {
            throw NumericError("train_autoencoder: non-finite loss at epoch " +
                               std::to_string(epoch + 1));
        }
        for (auto& p : params) p->zero_grad();
        tape.backward(loss);
        adam.step();
        epoch_loss[epoch] += loss->value() * static_cast<double>(ids.size());
    });
    for (double sum : epoch_loss) {
        model.training_loss_history.push_back(sum / static_cast<double>(train.rows));
    }
    return model;
}

VaeModel train_vae(const FeatureMatrix& train, const TrainConfig& cfg) {
    check_train_config(train, cfg, "train_vae");
    Rng rng(cfg.seed);
    VaeModel model = make_vae(train.cols, cfg, rng);
    auto params = model.params();
    ad::AdamState adam(params, ad::AdamConfig{.lr = cfg.lr});

    std::vector<VaeEpochStats> epochs(cfg.epochs);
    run_epochs(train.rows, cfg, rng, [&](std::size_t epoch, std::span<const std::size_t> ids) {
        auto x = tensor_from_rows(train, ids);
        std::vector<double> eps(ids.size() * cfg.latent_dim, 0.0);
        if (cfg.latent_noise_scale != 0.0) {
            for (auto& e : eps) e = cfg.latent_noise_scale * rng.normal();
        }
        ad::Tape tape;
        auto fwd = vae_forward(tape, model, x, eps);
        if (!std::isfinite(fwd.total->value())) {
            throw NumericError("train_vae: non-finite loss at epoch " + std::to_string(epoch + 1));
        }
        for (auto& p : params) p->zero_grad();
        tape.backward(fwd.total);
        adam.step();
        const double w = static_cast<double>(ids.size());
        epochs[epoch].total += fwd.total->value() * w;
        epochs[epoch].recon += fwd.recon_loss->value() * w;
        epochs[epoch].kl += fwd.kl_loss->value() * w;
    });
    const double n = static_cast<double>(train.rows);
    for (auto& e : epochs) {
        model.elbo_history.push_back({e.total / n, e.recon / n, e.kl / n});
    }
    return model;
}

double kl_standard_normal(std::span<const double> mu, std::span<const double> logvar) {
    if (mu.size() != logvar.size()) {
        throw DimensionError("kl_standard_normal: mu and logvar lengths differ");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        acc += mu[i] * mu[i] + std::exp(logvar[i]) - 1.0 - logvar[i];
    }
    return 0.5 * acc;
}

PcaModel fit_pca(const FeatureMatrix& train, std::size_t n_components) {
    const std::size_t n = train.rows;
    const std::size_t d = train.cols;
    if (n_components < 1) throw ConfigError("fit_pca: n_components must be >= 1");
    if (n < 2) throw DataError("fit_pca: need at least 2 rows, got " + std::to_string(n));
    if (n_components > std::min(n - 1, d)) {
        throw ConfigError("fit_pca: n_components=" + std::to_string(n_components) +
                          " exceeds min(N-1, D)=" + std::to_string(std::min(n - 1, d)));
    }

    Eigen::MatrixXd centered(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) centered(i, j) = train.at(i, j);
    }
    const Eigen::RowVectorXd mean = centered.colwise().mean();
    centered.rowwise() -= mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const Eigen::MatrixXd& v = svd.matrixV();  // d x min(n, d)

    double total_sq = 0.0;
    for (Eigen::Index j = 0; j < sigma.size(); ++j) total_sq += sigma[j] * sigma[j];

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + d);
    model.components = FeatureMatrix(n_components, d);
    for (std::size_t c = 0; c < n_components; ++c) {
        // flip so the largest-magnitude coefficient is positive
        Eigen::Index arg = 0;
        v.col(static_cast<Eigen::Index>(c)).cwiseAbs().maxCoeff(&arg);
        const double sign = v(arg, static_cast<Eigen::Index>(c)) < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            model.components.at(c, j) = sign * v(static_cast<Eigen::Index>(j),
                                                 static_cast<Eigen::Index>(c));
        }
        const double s = sigma[static_cast<Eigen::Index>(c)];
        model.singular_values.push_back(s);
        model.explained_variance_ratio.push_back(total_sq > 0.0 ? s * s / total_sq : 0.0);
    }
    return model;
}

FeatureMatrix reduce(const AeModel& model, const FeatureMatrix& data) {
    if (data.cols != model.input_dim()) {
        throw DimensionError("reduce(ae): data has " + std::to_string(data.cols) +
                             " columns, model expects " + std::to_string(model.input_dim()));
    }
    ad::Tape tape(false);
    auto x = tensor_from_matrix(data);
    auto h = ad::relu(tape, ad::dense_forward(tape, x, model.encoder[0]));
    return matrix_from_tensor(ad::dense_forward(tape, h, model.encoder[1]));
}

FeatureMatrix reduce(const VaeModel& model, const FeatureMatrix& data) {
    if (data.cols != model.input_dim()) {
        throw DimensionError("reduce(vae): data has " + std::to_string(data.cols) +
                             " columns, model expects " + std::to_string(model.input_dim()));
    }
    ad::Tape tape(false);
    auto x = tensor_from_matrix(data);
    auto trunk = ad::relu(tape, ad::dense_forward(tape, x, model.encoder_trunk[0]));
    return matrix_from_tensor(ad::dense_forward(tape, trunk, model.mu_head));
}

FeatureMatrix reduce(const PcaModel& model, const FeatureMatrix& data) {
    if (data.cols != model.input_dim()) {
        throw DimensionError("reduce(pca): data has " + std::to_string(data.cols) +
                             " columns, model expects " + std::to_string(model.input_dim()));
    }
    const std::size_t c_out = model.latent_dim();
    FeatureMatrix out(data.rows, c_out);
    kernels::for_each_index(data.rows, [&](std::size_t i) {
        for (std::size_t c = 0; c < c_out; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < data.cols; ++j) {
                acc += (data.at(i, j) - model.mean[j]) * model.components.at(c, j);
            }
            out.at(i, c) = acc;
        }
    });
    return out;
}

FeatureMatrix ae_reconstruct(const AeModel& model, const FeatureMatrix& data) {
    if (data.cols != model.input_dim()) {
        throw DimensionError("ae_reconstruct: column mismatch");
    }
    ad::Tape tape(false);
    auto x = tensor_from_matrix(data);
    return matrix_from_tensor(ae_forward(tape, model, x));
}

double reconstruction_mse(const AeModel& model, const FeatureMatrix& data) {
    const FeatureMatrix recon = ae_reconstruct(model, data);
    double acc = 0.0;
    for (std::size_t i = 0; i < data.data.size(); ++i) {
        const double diff = recon.data[i] - data.data[i];
        acc += diff * diff;
    }
    return acc / static_cast<double>(data.data.size());
}

VaeLossParts vae_eval_loss(const VaeModel& model, const FeatureMatrix& data,
                           const std::vector<double>* eps) {
    if (data.cols != model.input_dim()) {
        throw DimensionError("vae_eval_loss: column mismatch");
    }
    std::vector<double> noise(data.rows * model.latent_dim(), 0.0);
    if (eps != nullptr) {
        if (eps->size() != noise.size()) {
            throw DimensionError("vae_eval_loss: eps must have rows * latent_dim entries");
        }
        noise = *eps;
    }
    ad::Tape tape(false);
    auto fwd = vae_forward(tape, model, tensor_from_matrix(data), noise);
    return {fwd.total->value(), fwd.recon_loss->value(), fwd.kl_loss->value()};
}

FeatureMatrix pca_inverse_transform(const PcaModel& model, const FeatureMatrix& reduced) {
    if (reduced.cols != model.latent_dim()) {
        throw DimensionError("pca_inverse_transform: reduced has " + std::to_string(reduced.cols) +
                             " columns, model has " + std::to_string(model.latent_dim()) +
                             " components");
    }
    const std::size_t d = model.input_dim();
    FeatureMatrix out(reduced.rows, d);
    kernels::for_each_index(reduced.rows, [&](std::size_t i) {
        for (std::size_t j = 0; j < d; ++j) {
            double acc = model.mean[j];
            for (std::size_t c = 0; c < reduced.cols; ++c) {
                acc += reduced.at(i, c) * model.components.at(c, j);
            }
            out.at(i, j) = acc;
        }
    });
    return out;
}

namespace {

void push_layer(Checkpoint& ckpt, const std::string& prefix, const ad::DenseLayer& layer) {
    ckpt.params.push_back({prefix + ".weight", layer.weight->shape, layer.weight->data});
    ckpt.params.push_back({prefix + ".bias", layer.bias->shape, layer.bias->data});
}

ad::DenseLayer pull_layer(const Checkpoint& ckpt, const std::string& prefix) {
    const NamedBuffer& w = ckpt.find(prefix + ".weight");
    const NamedBuffer& b = ckpt.find(prefix + ".bias");
    if (w.shape.size() != 2 || b.shape.size() != 1) {
        throw DataError("checkpoint: bad shapes for layer " + prefix);
    }
    ad::DenseLayer layer;
    layer.weight = ad::Tensor::from_data(w.shape, w.values, true)->named(prefix + ".weight");
    layer.bias = ad::Tensor::from_data(b.shape, b.values, true)->named(prefix + ".bias");
    return layer;
}

}  // namespace

Checkpoint to_checkpoint(const AeModel& model) {
    Checkpoint ckpt;
    ckpt.model_kind = "ae";
    ckpt.meta = {{"input_dim", model.input_dim()},
                 {"hidden_dim", model.encoder[0].d_out()},
                 {"latent_dim", model.latent_dim()},
                 {"loss_history", model.training_loss_history}};
    for (std::size_t i = 0; i < model.encoder.size(); ++i) {
        push_layer(ckpt, "encoder." + std::to_string(i), model.encoder[i]);
    }
    for (std::size_t i = 0; i < model.decoder.size(); ++i) {
        push_layer(ckpt, "decoder." + std::to_string(i), model.decoder[i]);
    }
    return ckpt;
}

Checkpoint to_checkpoint(const VaeModel& model) {
    Checkpoint ckpt;
    ckpt.model_kind = "vae";
    std::vector<double> totals, recons, kls;
    for (const auto& e : model.elbo_history) {
        totals.push_back(e.total);
        recons.push_back(e.recon);
        kls.push_back(e.kl);
    }
    ckpt.meta = {{"input_dim", model.input_dim()},
                 {"hidden_dim", model.encoder_trunk[0].d_out()},
                 {"latent_dim", model.latent_dim()},
                 {"elbo_total", totals},
                 {"elbo_recon", recons},
                 {"elbo_kl", kls}};
    for (std::size_t i = 0; i < model.encoder_trunk.size(); ++i) {
        push_layer(ckpt, "encoder_trunk." + std::to_string(i), model.encoder_trunk[i]);
    }
    push_layer(ckpt, "mu_head", model.mu_head);
    push_layer(ckpt, "logvar_head", model.logvar_head);
    for (std::size_t i = 0; i < model.decoder.size(); ++i) {
        push_layer(ckpt, "decoder." + std::to_string(i), model.decoder[i]);
    }
    return ckpt;
}

Checkpoint to_checkpoint(const PcaModel& model) {
    Checkpoint ckpt;
    ckpt.model_kind = "pca";
    ckpt.meta = {{"input_dim", model.input_dim()}, {"latent_dim", model.latent_dim()}};
    ckpt.params.push_back({"mean", {model.mean.size()}, model.mean});
    ckpt.params.push_back(
        {"components", {model.components.rows, model.components.cols}, model.components.data});
    ckpt.params.push_back({"explained_variance_ratio",
                           {model.explained_variance_ratio.size()},
                           model.explained_variance_ratio});
    ckpt.params.push_back({"singular_values", {model.singular_values.size()}, model.singular_values});
    return ckpt;
}

AeModel ae_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.model_kind != "ae") {
        throw DataError("ae_from_checkpoint: checkpoint holds '" + ckpt.model_kind + "'");
    }
    AeModel model;
    model.encoder.push_back(pull_layer(ckpt, "encoder.0"));
    model.encoder.push_back(pull_layer(ckpt, "encoder.1"));
    model.decoder.push_back(pull_layer(ckpt, "decoder.0"));
    model.decoder.push_back(pull_layer(ckpt, "decoder.1"));
    if (ckpt.meta.contains("loss_history")) {
        model.training_loss_history = ckpt.meta["loss_history"].get<std::vector<double>>();
    }
    return model;
}

VaeModel vae_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.model_kind != "vae") {
        throw DataError("vae_from_checkpoint: checkpoint holds '" + ckpt.model_kind + "'");
    }
    VaeModel model;
    model.encoder_trunk.push_back(pull_layer(ckpt, "encoder_trunk.0"));
    model.mu_head = pull_layer(ckpt, "mu_head");
    model.logvar_head = pull_layer(ckpt, "logvar_head");
    model.decoder.push_back(pull_layer(ckpt, "decoder.0"));
    model.decoder.push_back(pull_layer(ckpt, "decoder.1"));
    if (ckpt.meta.contains("elbo_total")) {
        const auto totals = ckpt.meta["elbo_total"].get<std::vector<double>>();
        const auto recons = ckpt.meta["elbo_recon"].get<std::vector<double>>();
        const auto kls = ckpt.meta["elbo_kl"].get<std::vector<double>>();
        for (std::size_t i = 0; i < totals.size(); ++i) {
            model.elbo_history.push_back({totals[i], recons[i], kls[i]});
        }
    }
    return model;
}

PcaModel pca_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.model_kind != "pca") {
        throw DataError("pca_from_checkpoint: checkpoint holds '" + ckpt.model_kind + "'");
    }
    PcaModel model;
    model.mean = ckpt.find("mean").values;
    const NamedBuffer& comp = ckpt.find("components");
    if (comp.shape.size() != 2) throw DataError("pca checkpoint: components must be rank 2");
    model.components = FeatureMatrix(comp.shape[0], comp.shape[1]);
    model.components.data = comp.values;
    model.explained_variance_ratio = ckpt.find("explained_variance_ratio").values;
    model.singular_values = ckpt.find("singular_values").values;
    return model;
}

}  // namespace flowgat

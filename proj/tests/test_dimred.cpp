#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "flowgat/dimred.hpp"
#include "flowgat/errors.hpp"
#include "flowgat/rng.hpp"

using namespace flowgat;

namespace {

FeatureMatrix gaussian_data(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix m(n, d);
    for (auto& v : m.data) v = rng.normal();
    return m;
}

// n copies of one fixed row
FeatureMatrix constant_data(std::size_t n, const std::vector<double>& row) {
    FeatureMatrix m(n, row.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(row.begin(), row.end(), m.row(i).begin());
    }
    return m;
}

// 5-node Gauss-Hermite quadrature. The per-dimension KL integrand under the
// substitution x = mu + sigma*sqrt(2)*t is a quadratic in t, so this is exact
// up to rounding -- an oracle independent of the closed form.
double kl_quadrature(std::span<const double> mu, std::span<const double> logvar) {
    static const double nodes[5] = {-2.0201828704560856, -0.9585724646138185, 0.0,
                                    0.9585724646138185, 2.0201828704560856};
    static const double weights[5] = {0.019953242059045913, 0.39361932315224116,
                                      0.9453087204829419, 0.39361932315224116,
                                      0.019953242059045913};
    const double inv_sqrt_pi = 0.5641895835477563;
    double total = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double sigma = std::exp(logvar[i] / 2.0);
        double acc = 0.0;
        for (int q = 0; q < 5; ++q) {
            const double x = mu[i] + sigma * std::sqrt(2.0) * nodes[q];
            // log N(x; mu, sigma^2) - log N(x; 0, 1)
            const double log_q = -0.5 * logvar[i] - (x - mu[i]) * (x - mu[i]) /
                                                        (2.0 * sigma * sigma);
            const double log_p = -x * x / 2.0;
            acc += weights[q] * (log_q - log_p);
        }
        total += inv_sqrt_pi * acc;
    }
    return total;
}

}  // namespace

TEST_CASE("reducer kind parsing") {
    CHECK(parse_reducer("ae") == ReducerKind::ae_encoder);
    CHECK(parse_reducer("vae") == ReducerKind::vae_encoder);
    CHECK(parse_reducer("pca") == ReducerKind::pca);
    CHECK_THROWS_AS(parse_reducer("umap"), ConfigError);
    CHECK(reducer_name(ReducerKind::vae_encoder) == std::string("vae"));
}

TEST_CASE("kl_standard_normal: examples and quadrature oracle") {
    std::vector<double> zeros(4, 0.0);
    CHECK(kl_standard_normal(zeros, zeros) == doctest::Approx(0.0));

    std::vector<double> unit_shift{1.0, 0.0, 0.0, 0.0};
    CHECK(kl_standard_normal(unit_shift, zeros) == doctest::Approx(0.5).epsilon(1e-12));

    Rng rng(3);
    for (int it = 0; it < 200; ++it) {
        std::vector<double> mu(8), lv(8);
        for (auto& v : mu) v = rng.uniform(-3.0, 3.0);
        for (auto& v : lv) v = rng.uniform(-2.0, 2.0);
        const double closed = kl_standard_normal(mu, lv);
        CHECK(closed >= 0.0);
        CHECK(std::abs(closed - kl_quadrature(mu, lv)) < 1e-10);
    }
}

TEST_CASE("autoencoder memorizes a single repeated point") {
    auto data = constant_data(64, {0.2, 0.8, 0.1, 0.5, 0.9, 0.3, 0.7, 0.4});
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.batch = 64;
    cfg.lr = 0.02;
    cfg.latent_dim = 4;
    cfg.hidden_dim = 16;
    cfg.seed = 1;
    auto model = train_autoencoder(data, cfg);
    CHECK(model.training_loss_history.size() == 300);
    CHECK(reconstruction_mse(model, data) < 1e-3);
    CHECK(model.training_loss_history.back() <
          model.training_loss_history.front());
}

TEST_CASE("autoencoder on rank-2 data beats an untrained model by 10x") {
    // points on a 2-d plane embedded in 20 dims
    Rng rng(5);
    const std::size_t n = 256, d = 20;
    std::vector<double> u(d), v(d);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    FeatureMatrix data(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.normal(), b = rng.normal();
        for (std::size_t j = 0; j < d; ++j) data.at(i, j) = a * u[j] + b * v[j];
    }
    TrainConfig cfg;
    cfg.epochs = 120;
    cfg.batch = 64;
    cfg.lr = 0.005;
    cfg.latent_dim = 8;
    cfg.hidden_dim = 32;
    cfg.seed = 2;
    auto trained = train_autoencoder(data, cfg);
    Rng init_rng(cfg.seed);
    auto untrained = make_autoencoder(d, cfg, init_rng);
    const double trained_mse = reconstruction_mse(trained, data);
    const double untrained_mse = reconstruction_mse(untrained, data);
    CHECK(trained_mse * 10.0 < untrained_mse);
}

TEST_CASE("autoencoder training is deterministic per seed") {
    auto data = gaussian_data(96, 8, 11);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch = 32;
    cfg.seed = 9;
    auto m1 = train_autoencoder(data, cfg);
    auto m2 = train_autoencoder(data, cfg);
    CHECK(m1.training_loss_history == m2.training_loss_history);
    auto r1 = reduce(m1, data);
    auto r2 = reduce(m2, data);
    CHECK(r1.data == r2.data);

    cfg.seed = 10;
    auto m3 = train_autoencoder(data, cfg);
    CHECK(m3.training_loss_history != m1.training_loss_history);
}

TEST_CASE("train config validation") {
    auto data = gaussian_data(16, 4, 1);
    TrainConfig cfg;
    cfg.batch = 32;  // batch larger than the dataset
    CHECK_THROWS_AS(train_autoencoder(data, cfg), ConfigError);
    cfg.batch = 8;
    cfg.latent_dim = 8;  // latent wider than the input
    CHECK_THROWS_AS(train_autoencoder(data, cfg), ConfigError);
    cfg.latent_dim = 2;
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_autoencoder(data, cfg), ConfigError);
    cfg.epochs = 1;
    cfg.lr = -0.1;
    CHECK_THROWS_AS(train_autoencoder(data, cfg), ConfigError);
}

TEST_CASE("vae: objective decreases and KL trends small on gaussian data") {
    auto data = gaussian_data(512, 8, 21);
    TrainConfig cfg;  // defaults: 20 epochs, batch 128, lr 1e-3
    cfg.seed = 4;
    auto model = train_vae(data, cfg);
    REQUIRE(model.elbo_history.size() == 20);
    CHECK(model.elbo_history.back().total < model.elbo_history.front().total);

    double kl_first = 0.0, kl_last = 0.0, recon_last = 0.0;
    for (int e = 0; e < 5; ++e) {
        kl_first += model.elbo_history[e].kl;
        kl_last += model.elbo_history[15 + e].kl;
        recon_last += model.elbo_history[15 + e].recon;
    }
    CHECK(kl_last < kl_first);          // KL trends toward small values
    CHECK(recon_last / 5.0 < 10.0);     // reconstruction stays bounded
    for (const auto& e : model.elbo_history) {
        CHECK(e.kl >= 0.0);
        CHECK(std::isfinite(e.total));
    }
}

TEST_CASE("vae: zero noise scale makes evaluation deterministic") {
    auto data = gaussian_data(128, 6, 31);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch = 64;
    cfg.latent_dim = 3;
    cfg.hidden_dim = 16;
    cfg.seed = 8;
    auto model = train_vae(data, cfg);
    auto a = vae_eval_loss(model, data);  // nullptr eps -> zero noise
    auto b = vae_eval_loss(model, data);
    CHECK(a.total == b.total);
    CHECK(a.recon == b.recon);
    CHECK(a.kl == b.kl);
    CHECK(a.total == doctest::Approx(a.recon + a.kl));

    // reduce() returns mu and ignores noise entirely
    auto r1 = reduce(model, data);
    auto r2 = reduce(model, data);
    CHECK(r1.data == r2.data);
    CHECK(r1.cols == 3);
}

TEST_CASE("vae training is deterministic per seed") {
    auto data = gaussian_data(160, 6, 41);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch = 64;
    cfg.latent_dim = 3;
    cfg.hidden_dim = 12;
    cfg.seed = 13;
    auto m1 = train_vae(data, cfg);
    auto m2 = train_vae(data, cfg);
    REQUIRE(m1.elbo_history.size() == m2.elbo_history.size());
    for (std::size_t e = 0; e < m1.elbo_history.size(); ++e) {
        CHECK(m1.elbo_history[e].total == m2.elbo_history[e].total);
        CHECK(m1.elbo_history[e].recon == m2.elbo_history[e].recon);
        CHECK(m1.elbo_history[e].kl == m2.elbo_history[e].kl);
    }
    CHECK(reduce(m1, data).data == reduce(m2, data).data);
}

TEST_CASE("vae with zeroed logvar head matches AE loss plus mean KL of mu") {
    // Construct a VAE, zero its logvar head so sigma = 1 and eps = 0 gives
    // z = mu; the objective must equal the AE reconstruction MSE scaled up to
    // a per-sample sum (x D, the ELBO convention) plus the batch-mean KL
    // computed directly from mu.
    auto data = gaussian_data(40, 5, 51);
    TrainConfig cfg;
    cfg.latent_dim = 3;
    cfg.hidden_dim = 8;
    Rng rng(17);
    auto vae = make_vae(5, cfg, rng);
    std::fill(vae.logvar_head.weight->data.begin(), vae.logvar_head.weight->data.end(), 0.0);
    std::fill(vae.logvar_head.bias->data.begin(), vae.logvar_head.bias->data.end(), 0.0);

    auto parts = vae_eval_loss(vae, data);

    auto mu = reduce(vae, data);
    double kl_acc = 0.0;
    std::vector<double> zeros(mu.cols, 0.0);
    for (std::size_t i = 0; i < mu.rows; ++i) {
        kl_acc += kl_standard_normal(mu.row(i), zeros);
    }
    const double want_kl = kl_acc / static_cast<double>(mu.rows);
    CHECK(parts.kl == doctest::Approx(want_kl).epsilon(1e-12));

    // decoder(mu) reconstruction via an equivalent AE built from the same weights
    AeModel ae;
    ae.encoder = vae.encoder_trunk;
    ae.encoder.push_back(vae.mu_head);
    ae.decoder = vae.decoder;
    const double want_recon = 5.0 * reconstruction_mse(ae, data);  // D = 5
    CHECK(parts.recon == doctest::Approx(want_recon).epsilon(1e-12));
    CHECK(parts.total == doctest::Approx(want_recon + want_kl).epsilon(1e-12));
}

TEST_CASE("pca: rank-1 data explains everything with one component") {
    Rng rng(61);
    FeatureMatrix data(50, 3);
    for (std::size_t i = 0; i < 50; ++i) {
        const double t = rng.normal();
        data.at(i, 0) = 2.0 * t;
        data.at(i, 1) = -1.0 * t;
        data.at(i, 2) = 0.5 * t;
    }
    auto model = fit_pca(data, 1);
    REQUIRE(model.explained_variance_ratio.size() == 1);
    CHECK(model.explained_variance_ratio[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("pca: axis-aligned variances 4 and 1 give ratios near (0.8, 0.2)") {
    Rng rng(62);
    const std::size_t n = 50000;
    FeatureMatrix data(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        data.at(i, 0) = 2.0 * rng.normal();  // variance 4
        data.at(i, 1) = rng.normal();        // variance 1
    }
    auto model = fit_pca(data, 2);
    CHECK(std::abs(model.explained_variance_ratio[0] - 0.8) < 0.02);
    CHECK(std::abs(model.explained_variance_ratio[1] - 0.2) < 0.02);
    // first component should align with the high-variance axis
    CHECK(std::abs(model.components.at(0, 0)) > 0.99);
}

TEST_CASE("pca components are orthonormal") {
    auto data = gaussian_data(400, 12, 63);
    auto model = fit_pca(data, 8);
    for (std::size_t a = 0; a < 8; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < 12; ++j) dot += model.components.at(a, j) * model.components.at(b, j);
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-8);
        }
    }
    // variance ratios are non-increasing and sum to <= 1
    double sum = 0.0;
    for (std::size_t c = 1; c < 8; ++c) {
        CHECK(model.explained_variance_ratio[c] <= model.explained_variance_ratio[c - 1]);
    }
    for (double r : model.explained_variance_ratio) sum += r;
    CHECK(sum <= 1.0 + 1e-12);
}

TEST_CASE("pca sign convention: largest-magnitude coefficient is positive") {
    auto data = gaussian_data(300, 7, 64);
    auto model = fit_pca(data, 5);
    for (std::size_t c = 0; c < 5; ++c) {
        double best = 0.0;
        for (std::size_t j = 0; j < 7; ++j) {
            if (std::abs(model.components.at(c, j)) > std::abs(best)) {
                best = model.components.at(c, j);
            }
        }
        CHECK(best > 0.0);
    }
}

TEST_CASE("pca: full-rank projection round-trips") {
    auto data = gaussian_data(100, 6, 65);
    auto model = fit_pca(data, 6);
    auto reduced = reduce(model, data);
    auto restored = pca_inverse_transform(model, reduced);
    for (std::size_t i = 0; i < data.data.size(); ++i) {
        CHECK(std::abs(restored.data[i] - data.data[i]) < 1e-8);
    }
}

TEST_CASE("pca reduce with hand-set identity components selects columns") {
    PcaModel model;
    model.mean.assign(4, 0.0);
    model.components = FeatureMatrix(2, 4);
    model.components.at(0, 0) = 1.0;
    model.components.at(1, 1) = 1.0;
    model.explained_variance_ratio = {0.5, 0.5};
    model.singular_values = {1.0, 1.0};
    FeatureMatrix data(2, 4);
    for (std::size_t i = 0; i < 8; ++i) data.data[i] = static_cast<double>(i);
    auto r = reduce(model, data);
    CHECK(r.at(0, 0) == doctest::Approx(0.0));
    CHECK(r.at(0, 1) == doctest::Approx(1.0));
    CHECK(r.at(1, 0) == doctest::Approx(4.0));
    CHECK(r.at(1, 1) == doctest::Approx(5.0));
}

TEST_CASE("pca component count limits") {
    auto data = gaussian_data(10, 4, 66);
    CHECK_THROWS_AS(fit_pca(data, 5), ConfigError);   // > D
    CHECK_NOTHROW(fit_pca(data, 4));
    auto tiny = gaussian_data(3, 8, 67);
    CHECK_THROWS_AS(fit_pca(tiny, 3), ConfigError);   // > N - 1
    CHECK_NOTHROW(fit_pca(tiny, 2));
}

TEST_CASE("reducer checkpoints round-trip exactly") {
    auto data = gaussian_data(80, 6, 71);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch = 40;
    cfg.latent_dim = 3;
    cfg.hidden_dim = 10;
    cfg.seed = 3;

    auto ae = train_autoencoder(data, cfg);
    auto ae2 = ae_from_checkpoint(to_checkpoint(ae));
    CHECK(reduce(ae2, data).data == reduce(ae, data).data);
    CHECK(ae2.training_loss_history == ae.training_loss_history);

    auto vae = train_vae(data, cfg);
    auto vae2 = vae_from_checkpoint(to_checkpoint(vae));
    CHECK(reduce(vae2, data).data == reduce(vae, data).data);

    auto pca = fit_pca(data, 3);
    auto pca2 = pca_from_checkpoint(to_checkpoint(pca));
    CHECK(pca2.mean == pca.mean);
    CHECK(pca2.components.data == pca.components.data);
    CHECK(pca2.explained_variance_ratio == pca.explained_variance_ratio);
    CHECK(reduce(pca2, data).data == reduce(pca, data).data);
}

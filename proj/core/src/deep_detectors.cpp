#include <algorithm>
#include <cmath>
#include <string>

#include "adbench/detector.hpp"
#include "adbench/errors.hpp"
#include "adbench/losses.hpp"
#include "adbench/rng.hpp"

namespace adbench {

namespace {

void validate_deep_config(const DetectorConfig& cfg, const Matrix& data) {
    if (cfg.latent_dim < 1) throw ConfigError("deep detector: latent_dim must be >= 1");
    if (cfg.latent_dim > static_cast<int>(data.cols()))
        throw ConfigError("deep detector: latent_dim exceeds data dimension");
    if (cfg.steps < 0) throw ConfigError("deep detector: steps must be >= 0");
    if (cfg.batch_size < 1) throw ConfigError("deep detector: batch size must be >= 1");
}

int effective_batch(const DetectorConfig& cfg, const Matrix& data) {
    return std::min<int>(cfg.batch_size, static_cast<int>(data.rows()));
}

Matrix sample_batch(const Matrix& data, int batch, Rng& rng) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(batch));
    for (auto& i : idx) i = rng.below(data.rows());
    return take_rows(data, idx);
}

Matrix draw_normal(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

void check_loss_finite(double value, int step, const char* what) {
    if (!std::isfinite(value))
        throw TrainingError(std::string(what) + " diverged (non-finite loss at step " +
                            std::to_string(step) + ")");
}

void check_params_finite(const Mlp& net, const char* what) {
    if (!net.all_finite())
        throw TrainingError(std::string(what) + ": non-finite parameters after training");
}

std::vector<int> encoder_sizes(int d, const DetectorConfig& cfg, int code_width) {
    std::vector<int> sizes{d};
    std::vector<int> hidden = interp_architecture(d, cfg.latent_dim, cfg.hidden_layers);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(code_width);
    return sizes;
}

std::vector<int> decoder_sizes(int d, const DetectorConfig& cfg) {
    std::vector<int> sizes{cfg.latent_dim};
    std::vector<int> hidden = interp_architecture(d, cfg.latent_dim, cfg.hidden_layers);
    sizes.insert(sizes.end(), hidden.rbegin(), hidden.rend());
    sizes.push_back(d);
    return sizes;
}

}  // namespace

// ---------------------------------------------------------------------------
// Autoencoder

AePair train_autoencoder(const DetectorConfig& cfg, const Matrix& data) {
    validate_deep_config(cfg, data);
    int d = static_cast<int>(data.cols());
    Mlp enc = Mlp::create(encoder_sizes(d, cfg, cfg.latent_dim), Activation::Relu,
                          Activation::Linear, fnv1a64("enc", cfg.seed));
    Mlp dec = Mlp::create(decoder_sizes(d, cfg), Activation::Relu, Activation::Linear,
                          fnv1a64("dec", cfg.seed));
    AdamState st_enc = AdamState::init(enc, cfg.learning_rate);
    AdamState st_dec = AdamState::init(dec, cfg.learning_rate);

    int batch = effective_batch(cfg, data);
    Rng rng(fnv1a64("batches", cfg.seed));
    for (int step = 0; step < cfg.steps; ++step) {
        Matrix x = sample_batch(data, batch, rng);
        ForwardTrace tr_enc = forward(enc, x);
        ForwardTrace tr_dec = forward(dec, tr_enc.output());
        MseResult loss = mse_recon_loss(x, tr_dec.output());
        check_loss_finite(loss.value, step, "autoencoder");
        BackwardResult bw_dec = backward(dec, tr_dec, loss.grad);
        BackwardResult bw_enc = backward(enc, tr_enc, bw_dec.input_grad);
        adam_step(dec, bw_dec.grads, st_dec);
        adam_step(enc, bw_enc.grads, st_enc);
    }
    check_params_finite(enc, "autoencoder encoder");
    check_params_finite(dec, "autoencoder decoder");
    return {std::move(enc), std::move(dec)};
}

AeDetector::AeDetector(Mlp encoder, Mlp decoder)
    : encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
    if (encoder_.output_dim() != decoder_.input_dim() ||
        encoder_.input_dim() != decoder_.output_dim())
        throw ConfigError("ae detector: encoder/decoder dimensions do not chain");
}

double AeDetector::score(std::span<const double> x) const {
    Matrix batch(1, x.size());
    std::copy(x.begin(), x.end(), batch.data().begin());
    return score_batch(batch)[0];
}

std::vector<double> AeDetector::score_batch(const Matrix& m) const {
    Matrix recon = forward_output(decoder_, forward_output(encoder_, m));
    return rowwise_squared_error(m, recon);
}

// ---------------------------------------------------------------------------
// Variational autoencoder

AePair train_vae(const DetectorConfig& cfg, const Matrix& data) {
    validate_deep_config(cfg, data);
    if (cfg.kl_weight <= 0.0) throw ConfigError("vae: kl weight must be > 0");
    int d = static_cast<int>(data.cols());
    int z = cfg.latent_dim;
    Mlp enc = Mlp::create(encoder_sizes(d, cfg, 2 * z), Activation::Relu, Activation::Linear,
                          fnv1a64("enc", cfg.seed));
    Mlp dec = Mlp::create(decoder_sizes(d, cfg), Activation::Relu, Activation::Linear,
                          fnv1a64("dec", cfg.seed));
    AdamState st_enc = AdamState::init(enc, cfg.learning_rate);
    AdamState st_dec = AdamState::init(dec, cfg.learning_rate);

    int batch = effective_batch(cfg, data);
    Rng rng(fnv1a64("batches", cfg.seed));
    for (int step = 0; step < cfg.steps; ++step) {
        Matrix x = sample_batch(data, batch, rng);
        std::size_t b = x.rows();

        ForwardTrace tr_enc = forward(enc, x);
        const Matrix& code = tr_enc.output();  // [b × 2z]: mu | logvar
        Matrix mu(b, z), logvar(b, z);
        for (std::size_t i = 0; i < b; ++i)
            for (int j = 0; j < z; ++j) {
                mu(i, j) = code(i, j);
                logvar(i, j) = code(i, j + z);
            }

        Matrix eps = draw_normal(b, z, rng);
        Matrix sigma(b, z);
        Matrix zb(b, z);
        for (std::size_t i = 0; i < b * static_cast<std::size_t>(z); ++i) {
            sigma.data()[i] = std::exp(0.5 * logvar.data()[i]);
            zb.data()[i] = mu.data()[i] + sigma.data()[i] * eps.data()[i];
        }

        ForwardTrace tr_dec = forward(dec, zb);
        MseResult recon = mse_recon_loss(x, tr_dec.output());
        BatchKlResult kl = kl_gauss_batch(mu, logvar);
        double total = recon.value + cfg.kl_weight * kl.value;
        check_loss_finite(total, step, "vae");

        BackwardResult bw_dec = backward(dec, tr_dec, recon.grad);
        const Matrix& dz = bw_dec.input_grad;  // dLoss/dz

        Matrix code_grad(b, 2 * static_cast<std::size_t>(z));
        for (std::size_t i = 0; i < b; ++i)
            for (int j = 0; j < z; ++j) {
                // z = mu + exp(logvar/2) * eps
                code_grad(i, j) = dz(i, j) + cfg.kl_weight * kl.d_mu(i, j);
                code_grad(i, j + z) = dz(i, j) * 0.5 * sigma(i, j) * eps(i, j) +
                                      cfg.kl_weight * kl.d_logvar(i, j);
            }
        BackwardResult bw_enc = backward(enc, tr_enc, code_grad);
        adam_step(dec, bw_dec.grads, st_dec);
        adam_step(enc, bw_enc.grads, st_enc);
    }
    check_params_finite(enc, "vae encoder");
    check_params_finite(dec, "vae decoder");
    return {std::move(enc), std::move(dec)};
}

VaeDetector::VaeDetector(Mlp encoder, Mlp decoder, int latent_dim, int score_draws,
                         std::uint64_t score_seed, bool code_likelihood_score)
    : encoder_(std::move(encoder)),
      decoder_(std::move(decoder)),
      latent_dim_(latent_dim),
      score_draws_(score_draws),
      score_seed_(score_seed),
      code_likelihood_score_(code_likelihood_score) {
    if (encoder_.output_dim() != 2 * latent_dim_)
        throw ConfigError("vae detector: encoder must emit mean and log variance");
    if (decoder_.input_dim() != latent_dim_)
        throw ConfigError("vae detector: decoder input must match latent dimension");
    if (score_draws_ < 1) throw ConfigError("vae detector: score draws must be >= 1");
}

std::pair<std::vector<double>, std::vector<double>> VaeDetector::encode(
    std::span<const double> x) const {
    Matrix in(1, x.size());
    std::copy(x.begin(), x.end(), in.data().begin());
    Matrix code = forward_output(encoder_, in);
    std::vector<double> mu(code.data().begin(), code.data().begin() + latent_dim_);
    std::vector<double> logvar(code.data().begin() + latent_dim_, code.data().end());
    return {std::move(mu), std::move(logvar)};
}

Matrix VaeDetector::draw_codes(std::span<const double> x, int n) const {
    auto [mu, logvar] = encode(x);
    Rng rng(score_seed_);
    Matrix codes(static_cast<std::size_t>(n), static_cast<std::size_t>(latent_dim_));
    for (std::size_t i = 0; i < codes.rows(); ++i)
        for (int j = 0; j < latent_dim_; ++j)
            codes(i, j) = mu[j] + std::exp(0.5 * logvar[j]) * rng.normal();
    return codes;
}

double VaeDetector::reconstruction_score(std::span<const double> x, int n_z) const {
    if (n_z < 1) throw ConfigError("vae score: n_z must be >= 1");
    Matrix codes = draw_codes(x, n_z);
    Matrix recon = forward_output(decoder_, codes);
    double total = 0.0;
    for (std::size_t i = 0; i < recon.rows(); ++i) {
        double s = 0.0;
        auto row = recon.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            double d = x[j] - row[j];
            s += d * d;
        }
        total += s;
    }
    return total / static_cast<double>(n_z);
}

double VaeDetector::code_log_likelihood(std::span<const double> x) const {
    auto [mu, logvar] = encode(x);
    constexpr double half_log_2pi = 0.91893853320467274178;  // log(2*pi)/2
    double ll = 0.0;
    for (double m : mu) ll += -half_log_2pi - 0.5 * m * m;
    return ll;
}

double VaeDetector::score(std::span<const double> x) const {
    if (code_likelihood_score_) return -code_log_likelihood(x);
    return reconstruction_score(x, score_draws_);
}

// ---------------------------------------------------------------------------
// GAN / feature-matching GAN

GanPair train_gan(const DetectorConfig& cfg, const Matrix& data, bool feature_matching) {
    validate_deep_config(cfg, data);
    int d = static_cast<int>(data.cols());
    int z = cfg.latent_dim;
    std::vector<int> hidden = interp_architecture(d, z, cfg.hidden_layers);

    std::vector<int> gen_sizes{z};
    gen_sizes.insert(gen_sizes.end(), hidden.rbegin(), hidden.rend());
    gen_sizes.push_back(d);
    std::vector<int> disc_sizes{d};
    disc_sizes.insert(disc_sizes.end(), hidden.begin(), hidden.end());
    disc_sizes.push_back(1);

    Mlp gen = Mlp::create(gen_sizes, Activation::Relu, Activation::Linear,
                          fnv1a64("gen", cfg.seed));
    Mlp disc = Mlp::create(disc_sizes, Activation::Relu, Activation::Sigmoid,
                           fnv1a64("disc", cfg.seed));
    AdamState st_gen = AdamState::init(gen, cfg.learning_rate);
    AdamState st_disc = AdamState::init(disc, cfg.learning_rate);

    int batch = effective_batch(cfg, data);
    std::size_t b = static_cast<std::size_t>(batch);
    std::size_t penult = disc.layers().size() - 1;  // trace index of the last hidden activation
    Rng rng(fnv1a64("batches", cfg.seed));

    for (int step = 0; step < cfg.steps; ++step) {
        // --- discriminator step
        Matrix x = sample_batch(data, batch, rng);
        Matrix noise = draw_normal(b, static_cast<std::size_t>(z), rng);
        Matrix fake = forward_output(gen, noise);
        ForwardTrace tr_real = forward(disc, x);
        ForwardTrace tr_fake = forward(disc, fake);

        BceResult bce =
            bce_logit_losses(tr_real.output().data(), tr_fake.output().data());
        check_loss_finite(bce.loss_d, step, feature_matching ? "fmgan" : "gan");

        // gradients injected at the sigmoid pre-activation: exact and bounded
        Matrix g_real(b, 1), g_fake(b, 1);
        for (std::size_t i = 0; i < b; ++i) {
            g_real(i, 0) = (tr_real.output()(i, 0) - 1.0) / static_cast<double>(b);
            g_fake(i, 0) = tr_fake.output()(i, 0) / static_cast<double>(b);
        }
        BackwardResult bw_real = backward(disc, tr_real, g_real, /*preactivation=*/true);
        BackwardResult bw_fake = backward(disc, tr_fake, g_fake, /*preactivation=*/true);
        bw_real.grads.add_scaled(bw_fake.grads, 1.0);
        adam_step(disc, bw_real.grads, st_disc);

        // --- generator step
        Matrix noise2 = draw_normal(b, static_cast<std::size_t>(z), rng);
        ForwardTrace tr_gen = forward(gen, noise2);
        ForwardTrace tr_fake2 = forward(disc, tr_gen.output());

        double loss_g = 0.0;
        Matrix gz(b, 1);
        for (std::size_t i = 0; i < b; ++i) {
            double p = tr_fake2.output()(i, 0);
            loss_g -= std::log(clamp_prob(p));
            gz(i, 0) = (p - 1.0) / static_cast<double>(b);
        }
        loss_g /= static_cast<double>(b);

        BackwardResult bw_disc_path = backward(disc, tr_fake2, gz, /*preactivation=*/true);
        Matrix fake_grad = bw_disc_path.input_grad;
        double loss_total = loss_g;

        if (feature_matching) {
            Matrix x2 = sample_batch(data, batch, rng);
            ForwardTrace tr_real2 = forward(disc, x2);
            const Matrix& h_real = tr_real2.activations[penult];
            const Matrix& h_fake = tr_fake2.activations[penult];
            Matrix dh(h_fake.rows(), h_fake.cols());
            double fm = 0.0;
            for (std::size_t i = 0; i < h_real.rows(); ++i) {
                double norm = euclidean(h_real.row(i), h_fake.row(i));
                fm += norm / static_cast<double>(b);
                if (norm > 0.0) {
                    for (std::size_t j = 0; j < h_real.cols(); ++j)
                        dh(i, j) = -(h_real(i, j) - h_fake(i, j)) /
                                   (norm * static_cast<double>(b));
                }
            }
            BackwardResult bw_fm = backward_from_layer(disc, tr_fake2, penult, dh);
            for (std::size_t i = 0; i < fake_grad.data().size(); ++i)
                fake_grad.data()[i] = cfg.feature_match_weight * fake_grad.data()[i] +
                                      bw_fm.input_grad.data()[i];
            loss_total = cfg.feature_match_weight * loss_g + fm;
        }
        check_loss_finite(loss_total, step, feature_matching ? "fmgan" : "gan");

        BackwardResult bw_gen = backward(gen, tr_gen, fake_grad);
        adam_step(gen, bw_gen.grads, st_gen);
    }
    check_params_finite(gen, "gan generator");
    check_params_finite(disc, "gan discriminator");
    return {std::move(gen), std::move(disc)};
}

GanDetector::GanDetector(Algorithm algo, Mlp generator, Mlp discriminator, int latent_dim,
                         double score_mix, int score_draws, std::uint64_t score_seed)
    : algo_(algo),
      generator_(std::move(generator)),
      discriminator_(std::move(discriminator)),
      latent_dim_(latent_dim),
      score_mix_(score_mix),
      score_draws_(score_draws),
      score_seed_(score_seed) {
    if (algo_ != Algorithm::Gan && algo_ != Algorithm::FmGan)
        throw ConfigError("gan detector: algorithm must be gan or fmgan");
    if (score_mix_ < 0.0 || score_mix_ > 1.0)
        throw ConfigError("gan detector: score mix must be in [0, 1]");
    if (score_draws_ < 1) throw ConfigError("gan detector: score draws must be >= 1");
    if (generator_.output_dim() != discriminator_.input_dim())
        throw ConfigError("gan detector: generator/discriminator dimensions do not chain");
    anchors_ = generate(score_draws_, score_seed_);
}

Matrix GanDetector::generate(int n, std::uint64_t seed) const {
    Rng rng(seed);
    Matrix noise(static_cast<std::size_t>(n), static_cast<std::size_t>(latent_dim_));
    for (double& v : noise.data()) v = rng.normal();
    return forward_output(generator_, noise);
}

double GanDetector::discriminator_prob(std::span<const double> x) const {
    Matrix in(1, x.size());
    std::copy(x.begin(), x.end(), in.data().begin());
    return forward_output(discriminator_, in)(0, 0);
}

double GanDetector::score_with(std::span<const double> x, double lambda, int n_z) const {
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("gan score: lambda must be in [0, 1]");
    if (n_z < 1) throw ConfigError("gan score: n_z must be >= 1");
    const Matrix& anchors =
        n_z == static_cast<int>(anchors_.rows()) ? anchors_ : generate(n_z, score_seed_);
    if (x.size() != anchors.cols()) throw ConfigError("gan score: dimension mismatch");

    double recon = 0.0;
    for (std::size_t i = 0; i < anchors.rows(); ++i) recon += euclidean(x, anchors.row(i));
    recon /= static_cast<double>(anchors.rows());

    double disc_term = 0.0;
    if (lambda < 1.0) disc_term = -std::log(clamp_prob(discriminator_prob(x)));
    return (1.0 - lambda) * disc_term + lambda * recon;
}

double GanDetector::score(std::span<const double> x) const {
    return score_with(x, score_mix_, score_draws_);
}

}  // namespace adbench

#include "doctest.h"

#include <cmath>
#include <sstream>

#include "adbench/dataset.hpp"
#include "adbench/detector.hpp"
#include "adbench/errors.hpp"
#include "adbench/losses.hpp"
#include "adbench/metrics.hpp"
#include "testutil.hpp"

using namespace adbench;

namespace {

// 16 points on a line in the plane: perfectly representable by a 1-D code
Matrix collinear_points() {
    Matrix m(16, 2);
    for (int i = 0; i < 16; ++i) {
        double t = -1.5 + 0.2 * i;
        m(i, 0) = t;
        m(i, 1) = 0.5 * t + 0.3;
    }
    return m;
}

DetectorConfig deep_config(Algorithm algo, int latent, int hidden, int steps, std::uint64_t seed) {
    DetectorConfig cfg;
    cfg.algorithm = algo;
    cfg.latent_dim = latent;
    cfg.hidden_layers = hidden;
    cfg.steps = steps;
    cfg.batch_size = 256;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("autoencoder memorizes representable data") {
    Matrix data = collinear_points();
    DetectorConfig cfg = deep_config(Algorithm::Ae, 1, 1, 10000, 3);
    auto det = fit(cfg, data);
    auto scores = det->score_batch(data);
    CHECK(testutil::mean(scores) < 1e-2);

    // a far outlier reconstructs badly compared to the memorized points
    std::vector<double> med_scores(scores.begin(), scores.end());
    double median_inlier = testutil::median(med_scores);
    std::vector<double> outlier{3.0, -2.0};  // far off the line
    CHECK(det->score(outlier) > 10.0 * std::max(median_inlier, 1e-6));
}

TEST_CASE("ae score equals the reconstruction error of the stored nets") {
    Matrix data = collinear_points();
    DetectorConfig cfg = deep_config(Algorithm::Ae, 1, 1, 200, 4);
    auto det = fit(cfg, data);
    const auto& ae = dynamic_cast<const AeDetector&>(*det);
    Matrix x = testutil::random_matrix(5, 2, 12);
    Matrix recon = forward_output(ae.decoder(), forward_output(ae.encoder(), x));
    auto direct = rowwise_squared_error(x, recon);
    auto scored = det->score_batch(x);
    for (std::size_t i = 0; i < x.rows(); ++i) CHECK(scored[i] == direct[i]);
    // perfect reconstruction scores zero
    CHECK(rowwise_squared_error(x, x)[0] == 0.0);
}

TEST_CASE("ae training is deterministic for a fixed seed") {
    Matrix data = collinear_points();
    DetectorConfig cfg = deep_config(Algorithm::Ae, 1, 1, 300, 11);
    auto a = fit(cfg, data);
    auto b = fit(cfg, data);
    Matrix x = testutil::random_matrix(4, 2, 5);
    CHECK(a->score_batch(x) == b->score_batch(x));
}

TEST_CASE("trained ae separates in-distribution from far-away points") {
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        RawDataset ds = synth_dataset(300, 0, 4, 0.0, seed * 17, "aeprop");
        DetectorConfig cfg = deep_config(Algorithm::Ae, 2, 1, 1500, seed);
        cfg.batch_size = 64;
        auto det = fit(cfg, ds.features);

        RawDataset held = synth_dataset(100, 0, 4, 0.0, seed * 17 + 1, "held");
        adbench::Rng rng(seed * 31);
        Matrix far(100, 4);
        for (double& v : far.data()) v = 5.0 + rng.normal();  // >= 5 sigma away

        auto held_scores = det->score_batch(held.features);
        auto far_scores = det->score_batch(far);
        if (testutil::median({held_scores.begin(), held_scores.end()}) <
            testutil::median({far_scores.begin(), far_scores.end()}))
            ++wins;
    }
    CHECK(wins >= 8);
}

TEST_CASE("vae with zero encoder variance scores the deterministic reconstruction") {
    // encoder: mu = x (identity), logvar = -1e6 (sigma underflows to zero)
    Mlp enc = Mlp::create({2, 4}, Activation::Linear, Activation::Linear, 1);
    for (auto& v : enc.layers()[0].weight.data()) v = 0.0;
    enc.layers()[0].weight(0, 0) = 1.0;
    enc.layers()[0].weight(1, 1) = 1.0;
    enc.layers()[0].bias = {0.0, 0.0, -1e6, -1e6};
    Mlp dec = Mlp::create({2, 2}, Activation::Linear, Activation::Linear, 2);

    VaeDetector det(std::move(enc), std::move(dec), 2, 7, 99, false);
    std::vector<double> x{0.7, -0.4};
    Matrix mu_in(1, 2);
    mu_in.data() = {0.7, -0.4};
    Matrix recon = forward_output(det.decoder(), mu_in);
    double want = 0.0;
    for (int j = 0; j < 2; ++j) {
        double d = x[j] - recon(0, j);
        want += d * d;
    }
    CHECK(det.reconstruction_score(x, 7) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("vae code log-likelihood matches the standard normal closed form") {
    // zero encoder: mu = 0, logvar = 0 for every input
    Mlp enc = Mlp::create({3, 4}, Activation::Linear, Activation::Linear, 1);
    for (auto& v : enc.layers()[0].weight.data()) v = 0.0;
    Mlp dec = Mlp::create({2, 3}, Activation::Linear, Activation::Linear, 2);
    VaeDetector det(std::move(enc), std::move(dec), 2, 4, 5, true);

    std::vector<double> x{1.0, 2.0, 3.0};
    double want = -0.5 * 2.0 * std::log(2.0 * 3.14159265358979323846);
    CHECK(det.code_log_likelihood(x) == doctest::Approx(want).epsilon(1e-12));
    // flagged score is the negated log-likelihood (higher = more anomalous)
    CHECK(det.score(x) == doctest::Approx(-want).epsilon(1e-12));
}

TEST_CASE("vae monte carlo score converges to the empirical mean") {
    RawDataset ds = synth_dataset(64, 0, 3, 0.0, 21, "mc");
    DetectorConfig cfg = deep_config(Algorithm::Vae, 1, 1, 300, 9);
    auto det = fit(cfg, ds.features);
    const auto& vae = dynamic_cast<const VaeDetector&>(*det);

    std::vector<double> x{0.2, -0.1, 0.4};
    double estimate = vae.reconstruction_score(x, 1000);

    // independent large-sample estimate of the same expectation
    Matrix codes = vae.draw_codes(x, 100000);
    Matrix recon = forward_output(vae.decoder(), codes);
    std::vector<double> errs(codes.rows());
    for (std::size_t i = 0; i < codes.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) {
            double d = x[j] - recon(i, j);
            s += d * d;
        }
        errs[i] = s;
    }
    double truth = testutil::mean(errs);
    double se = testutil::stddev(errs) / std::sqrt(1000.0);
    CHECK(std::fabs(estimate - truth) <= 3.0 * se);
}

TEST_CASE("reparameterized draws have the encoder's mean and spread") {
    // constant encoder: mu = (0.8, -0.2), logvar = (log 0.25, 0)
    Mlp enc = Mlp::create({2, 4}, Activation::Linear, Activation::Linear, 1);
    for (auto& v : enc.layers()[0].weight.data()) v = 0.0;
    enc.layers()[0].bias = {0.8, -0.2, std::log(0.25), 0.0};
    Mlp dec = Mlp::create({2, 2}, Activation::Linear, Activation::Linear, 2);
    VaeDetector det(std::move(enc), std::move(dec), 2, 4, 77, false);

    std::vector<double> x{0.0, 0.0};
    Matrix codes = det.draw_codes(x, 100000);
    std::vector<double> c0(codes.rows()), c1(codes.rows());
    for (std::size_t i = 0; i < codes.rows(); ++i) {
        c0[i] = codes(i, 0);
        c1[i] = codes(i, 1);
    }
    double se_mean0 = 0.5 / std::sqrt(100000.0);
    double se_mean1 = 1.0 / std::sqrt(100000.0);
    CHECK(std::fabs(testutil::mean(c0) - 0.8) < 3.0 * se_mean0);
    CHECK(std::fabs(testutil::mean(c1) + 0.2) < 3.0 * se_mean1);
    // sd of the sample sd is approximately sigma/sqrt(2n)
    CHECK(std::fabs(testutil::stddev(c0) - 0.5) < 3.0 * 0.5 / std::sqrt(2.0 * 100000.0));
    CHECK(std::fabs(testutil::stddev(c1) - 1.0) < 3.0 * 1.0 / std::sqrt(2.0 * 100000.0));
}

TEST_CASE("vae: heavy KL weight shrinks the posterior divergence") {
    RawDataset ds = synth_dataset(128, 0, 2, 0.0, 5, "klw");
    auto mean_kl = [&](double lambda) {
        DetectorConfig cfg = deep_config(Algorithm::Vae, 1, 1, 800, 13);
        cfg.kl_weight = lambda;
        cfg.batch_size = 64;
        auto det = fit(cfg, ds.features);
        const auto& vae = dynamic_cast<const VaeDetector&>(*det);
        double total = 0.0;
        for (std::size_t i = 0; i < ds.features.rows(); ++i) {
            auto [mu, logvar] = vae.encode(ds.features.row(i));
            total += kl_gauss(mu, logvar).value;
        }
        return total / static_cast<double>(ds.features.rows());
    };
    CHECK(mean_kl(1e6) < mean_kl(1e-4));
}

TEST_CASE("vae total loss gradient passes finite differences on a 2-2-2 net") {
    // fixed noise; loss = recon + lambda * KL through the reparameterization
    const double lambda = 0.7;
    Mlp enc = Mlp::create({2, 4}, Activation::Relu, Activation::Linear, 31);
    Mlp dec = Mlp::create({2, 2}, Activation::Relu, Activation::Linear, 32);
    Matrix x = testutil::random_matrix(3, 2, 33);
    Matrix eps = [] {
        adbench::Rng rng(34);
        Matrix e(3, 2);
        for (double& v : e.data()) v = rng.normal();
        return e;
    }();

    std::size_t n_enc = enc.param_count();
    auto loss_at = [&](const std::vector<double>& flat) {
        Mlp e = enc, d = dec;
        e.set_params({flat.data(), n_enc});
        d.set_params({flat.data() + n_enc, flat.size() - n_enc});
        Matrix code = forward_output(e, x);
        Matrix mu(3, 2), logvar(3, 2), zb(3, 2);
        for (std::size_t i = 0; i < 3; ++i)
            for (int j = 0; j < 2; ++j) {
                mu(i, j) = code(i, j);
                logvar(i, j) = code(i, j + 2);
                zb(i, j) = mu(i, j) + std::exp(0.5 * logvar(i, j)) * eps(i, j);
            }
        double recon = mse_recon_loss(x, forward_output(d, zb)).value;
        return recon + lambda * kl_gauss_batch(mu, logvar).value;
    };

    // analytic gradient assembled exactly like the trainer does
    ForwardTrace tr_enc = forward(enc, x);
    Matrix mu(3, 2), logvar(3, 2), sigma(3, 2), zb(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) {
            mu(i, j) = tr_enc.output()(i, j);
            logvar(i, j) = tr_enc.output()(i, j + 2);
            sigma(i, j) = std::exp(0.5 * logvar(i, j));
            zb(i, j) = mu(i, j) + sigma(i, j) * eps(i, j);
        }
    ForwardTrace tr_dec = forward(dec, zb);
    MseResult recon = mse_recon_loss(x, tr_dec.output());
    BatchKlResult kl = kl_gauss_batch(mu, logvar);
    BackwardResult bw_dec = backward(dec, tr_dec, recon.grad);
    Matrix code_grad(3, 4);
    for (std::size_t i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) {
            code_grad(i, j) = bw_dec.input_grad(i, j) + lambda * kl.d_mu(i, j);
            code_grad(i, j + 2) = bw_dec.input_grad(i, j) * 0.5 * sigma(i, j) * eps(i, j) +
                                  lambda * kl.d_logvar(i, j);
        }
    BackwardResult bw_enc = backward(enc, tr_enc, code_grad);

    std::vector<double> analytic = bw_enc.grads.flatten();
    auto dec_flat = bw_dec.grads.flatten();
    analytic.insert(analytic.end(), dec_flat.begin(), dec_flat.end());

    std::vector<double> params = enc.flatten_params();
    auto dec_params = dec.flatten_params();
    params.insert(params.end(), dec_params.begin(), dec_params.end());

    std::vector<double> fd = testutil::finite_diff(loss_at, params);
    CHECK(testutil::max_rel_err(analytic, fd) < 1e-4);
}

TEST_CASE("untrained gan discriminator is near chance") {
    double total_auc = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        RawDataset ds = synth_dataset(100, 0, 2, 0.0, seed * 7, "gan0");
        DetectorConfig cfg = deep_config(Algorithm::Gan, 1, 1, 0, seed);
        auto det = fit(cfg, ds.features);
        const auto& gan = dynamic_cast<const GanDetector&>(*det);

        Matrix fake = gan.generate(100, seed * 991);
        std::vector<double> scores;
        std::vector<int> labels;
        for (std::size_t i = 0; i < ds.features.rows(); ++i) {
            scores.push_back(-std::log(clamp_prob(gan.discriminator_prob(ds.features.row(i)))));
            labels.push_back(0);
        }
        for (std::size_t i = 0; i < fake.rows(); ++i) {
            scores.push_back(-std::log(clamp_prob(gan.discriminator_prob(fake.row(i)))));
            labels.push_back(1);
        }
        total_auc += auroc(scores, labels);
    }
    double mean_auc = total_auc / 10.0;
    CHECK(mean_auc > 0.3);
    CHECK(mean_auc < 0.7);
}

TEST_CASE("discriminator output is always a probability") {
    RawDataset ds = synth_dataset(64, 0, 2, 0.0, 3, "prob");
    DetectorConfig cfg = deep_config(Algorithm::Gan, 1, 1, 200, 8);
    cfg.batch_size = 32;
    auto det = fit(cfg, ds.features);
    const auto& gan = dynamic_cast<const GanDetector&>(*det);
    adbench::Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x{rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)};
        double p = gan.discriminator_prob(x);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("gan score: lambda extremes and the hand-computed value") {
    // constant nets: d(x) = 0.5 (zero logit), g(z) = (0, 0)
    Mlp gen = Mlp::create({1, 2}, Activation::Linear, Activation::Linear, 1);
    for (auto& v : gen.layers()[0].weight.data()) v = 0.0;
    Mlp disc = Mlp::create({2, 1}, Activation::Linear, Activation::Sigmoid, 2);
    for (auto& v : disc.layers()[0].weight.data()) v = 0.0;

    GanDetector det(Algorithm::Gan, std::move(gen), std::move(disc), 1, 0.5, 1, 77);
    std::vector<double> x{0.0, 2.0};  // ||x - g(z)|| = 2

    // lambda = 0.5: 0.5 * log 2 + 0.5 * 2 = 1.3466
    CHECK(det.score_with(x, 0.5, 1) ==
          doctest::Approx(0.5 * std::log(2.0) + 1.0).epsilon(1e-12));
    // lambda = 0 reduces to -log d(x)
    CHECK(det.score_with(x, 0.0, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // lambda = 1 is independent of the discriminator
    CHECK(det.score_with(x, 1.0, 1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("gan trained on 1-D standard normal roughly matches its moments") {
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        RawDataset ds = synth_dataset(512, 0, 1, 0.0, seed * 101, "gan1d");
        DetectorConfig cfg = deep_config(Algorithm::Gan, 1, 1, 10000, seed);
        cfg.batch_size = 128;
        auto det = fit(cfg, ds.features);
        const auto& gan = dynamic_cast<const GanDetector&>(*det);
        Matrix samples = gan.generate(2000, seed * 13 + 7);
        std::vector<double> vals(samples.data().begin(), samples.data().end());
        double m = testutil::mean(vals), s = testutil::stddev(vals);
        if (m >= -0.5 && m <= 0.5 && s >= 0.5 && s <= 1.5) ++ok;
    }
    CHECK(ok >= 6);  // majority of seeds
}

TEST_CASE("fmgan: feature-matching pieces") {
    RawDataset ds = synth_dataset(64, 0, 3, 0.0, 5, "fm");
    DetectorConfig cfg = deep_config(Algorithm::FmGan, 1, 2, 50, 3);
    cfg.batch_size = 32;
    auto det = fit(cfg, ds.features);
    const auto& gan = dynamic_cast<const GanDetector&>(*det);

    // h is the penultimate activation: width = last hidden layer
    const auto& disc = gan.discriminator();
    std::size_t penult = disc.layers().size() - 1;
    Matrix x = testutil::random_matrix(4, 3, 6);
    ForwardTrace tr = forward(disc, x);
    CHECK(tr.activations[penult].cols() == disc.layers()[penult - 1].weight.rows());

    // the matching term vanishes when the generated batch equals the real batch
    const Matrix& h = tr.activations[penult];
    double term = 0.0;
    for (std::size_t i = 0; i < h.rows(); ++i) term += euclidean(h.row(i), h.row(i));
    CHECK(term == 0.0);
}

TEST_CASE("fmgan at huge alpha steps in the pure-gan direction") {
    RawDataset ds = synth_dataset(256, 0, 2, 0.0, 9, "alpha");

    auto one_step_delta = [&](bool fm, double alpha) {
        DetectorConfig cfg = deep_config(fm ? Algorithm::FmGan : Algorithm::Gan, 1, 1, 1, 42);
        cfg.batch_size = 64;
        cfg.feature_match_weight = alpha;
        GanPair pair = train_gan(cfg, ds.features, fm);
        // same seed: identical init, so the delta is the first update
        Mlp init = Mlp::create({1, 2, 2}, Activation::Relu, Activation::Linear,
                               fnv1a64("gen", cfg.seed));
        std::vector<double> now = pair.generator.flatten_params();
        std::vector<double> before = init.flatten_params();
        for (std::size_t i = 0; i < now.size(); ++i) now[i] -= before[i];
        return now;
    };

    std::vector<double> fm_delta = one_step_delta(true, 1e8);
    std::vector<double> gan_delta = one_step_delta(false, 1.0);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < fm_delta.size(); ++i) {
        dot += fm_delta[i] * gan_delta[i];
        na += fm_delta[i] * fm_delta[i];
        nb += gan_delta[i] * gan_delta[i];
    }
    CHECK(dot / std::sqrt(na * nb) > 0.99);
}

TEST_CASE("fmgan scores through the same path as gan") {
    RawDataset ds = synth_dataset(64, 0, 2, 0.0, 4, "same");
    DetectorConfig cfg = deep_config(Algorithm::FmGan, 1, 1, 30, 6);
    cfg.batch_size = 32;
    cfg.score_mix = 0.4;
    auto det = fit(cfg, ds.features);
    const auto& fm = dynamic_cast<const GanDetector&>(*det);
    // rebuilding a plain GanDetector from the same nets gives identical scores
    GanDetector plain(Algorithm::Gan, fm.generator(), fm.discriminator(), 1, 0.4,
                      cfg.score_draws, fnv1a64("score", cfg.seed));
    Matrix q = testutil::random_matrix(6, 2, 8);
    for (std::size_t i = 0; i < q.rows(); ++i) CHECK(plain.score(q.row(i)) == fm.score(q.row(i)));
}

TEST_CASE("deep detector serialization round trips") {
    RawDataset ds = synth_dataset(64, 0, 2, 0.0, 15, "ser");
    for (Algorithm algo : {Algorithm::Ae, Algorithm::Vae, Algorithm::Gan, Algorithm::FmGan}) {
        DetectorConfig cfg = deep_config(algo, 1, 1, 60, 21);
        cfg.batch_size = 32;
        cfg.score_mix = 0.5;
        auto det = fit(cfg, ds.features);
        std::stringstream blob;
        det->save(blob);
        auto back = TrainedDetector::load(blob);
        CHECK(back->algorithm() == algo);
        Matrix q = testutil::random_matrix(5, 2, 30);
        for (std::size_t i = 0; i < q.rows(); ++i)
            CHECK(back->score(q.row(i)) == det->score(q.row(i)));
    }
}

TEST_CASE("deep configs validate latent dimension against the data") {
    RawDataset ds = synth_dataset(32, 0, 2, 0.0, 1, "v");
    DetectorConfig cfg = deep_config(Algorithm::Ae, 5, 1, 10, 1);
    CHECK_THROWS_AS(fit(cfg, ds.features), ConfigError);
}

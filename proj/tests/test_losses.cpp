#include "doctest.h"

#include <cmath>

#include "adbench/errors.hpp"
#include "adbench/losses.hpp"
#include "testutil.hpp"

using namespace adbench;

TEST_CASE("mse_recon_loss: identity, hand value, shape errors") {
    Matrix x = Matrix::from_rows({{0.3, -1.2}});
    CHECK(mse_recon_loss(x, x).value == 0.0);

    Matrix a = Matrix::from_rows({{0.0, 0.0}});
    Matrix b = Matrix::from_rows({{1.0, 1.0}});
    CHECK(mse_recon_loss(a, b).value == doctest::Approx(2.0));

    CHECK_THROWS_AS(mse_recon_loss(Matrix(1, 2), Matrix(2, 2)), ConfigError);
}

TEST_CASE("mse_recon_loss is nonnegative and zero only at equality") {
    adbench::Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        Matrix x = testutil::random_matrix(3, 4, rng.next_u64());
        Matrix y = testutil::random_matrix(3, 4, rng.next_u64());
        double v = mse_recon_loss(x, y).value;
        CHECK(v >= 0.0);
        if (x.data() != y.data()) CHECK(v > 0.0);
    }
}

TEST_CASE("mse_recon_loss gradient matches finite differences") {
    Matrix x = testutil::random_matrix(2, 3, 10);
    Matrix xhat = testutil::random_matrix(2, 3, 11);
    MseResult res = mse_recon_loss(x, xhat);

    auto loss_at = [&](const std::vector<double>& flat) {
        Matrix m(2, 3);
        m.data() = flat;
        return mse_recon_loss(x, m).value;
    };
    std::vector<double> fd = testutil::finite_diff(loss_at, xhat.data());
    std::vector<double> analytic(res.grad.data().begin(), res.grad.data().end());
    CHECK(testutil::max_rel_err(analytic, fd) < 1e-6);
}

TEST_CASE("kl_gauss: zero at the prior, hand value, nonnegativity") {
    std::vector<double> zero{0.0, 0.0};
    CHECK(kl_gauss(zero, zero).value == 0.0);

    std::vector<double> mu{1.0}, logvar{0.0};
    CHECK(kl_gauss(mu, logvar).value == doctest::Approx(0.5));

    adbench::Rng rng(6);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> m(3), lv(3);
        for (int i = 0; i < 3; ++i) {
            m[i] = rng.uniform(-3.0, 3.0);
            lv[i] = rng.uniform(-3.0, 3.0);
        }
        CHECK(kl_gauss(m, lv).value >= 0.0);
    }
}

TEST_CASE("kl_gauss rejects non-finite input and length mismatch") {
    std::vector<double> bad{std::nan("")}, ok{0.0};
    CHECK_THROWS_AS(kl_gauss(bad, ok), TrainingError);
    std::vector<double> two{0.0, 0.0};
    CHECK_THROWS_AS(kl_gauss(two, ok), ConfigError);
}

TEST_CASE("kl_gauss gradients match finite differences") {
    std::vector<double> mu{0.4, -0.9, 1.3}, logvar{0.2, -0.5, 0.8};
    KlResult res = kl_gauss(mu, logvar);

    auto loss_mu = [&](const std::vector<double>& m) { return kl_gauss(m, logvar).value; };
    auto loss_lv = [&](const std::vector<double>& lv) { return kl_gauss(mu, lv).value; };
    CHECK(testutil::max_rel_err(res.d_mu, testutil::finite_diff(loss_mu, mu)) < 1e-6);
    CHECK(testutil::max_rel_err(res.d_logvar, testutil::finite_diff(loss_lv, logvar)) < 1e-6);
}

TEST_CASE("kl_gauss_batch averages the per-row divergences") {
    Matrix mu = Matrix::from_rows({{1.0}, {0.0}});
    Matrix lv = Matrix::from_rows({{0.0}, {0.0}});
    BatchKlResult res = kl_gauss_batch(mu, lv);
    CHECK(res.value == doctest::Approx(0.25));  // (0.5 + 0) / 2
    CHECK(res.d_mu(0, 0) == doctest::Approx(0.5));
    CHECK(res.d_mu(1, 0) == 0.0);
}

TEST_CASE("bce_logit_losses: balanced probabilities give the closed-form values") {
    std::vector<double> real{0.5}, fake{0.5};
    BceResult res = bce_logit_losses(real, fake);
    CHECK(res.loss_d == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(res.loss_g == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("bce_logit_losses: a perfect discriminator drives L_d to zero") {
    std::vector<double> real{1.0, 1.0}, fake{0.0, 0.0};
    BceResult res = bce_logit_losses(real, fake);
    CHECK(res.loss_d < 1e-5);  // clamped logs keep it finite
    CHECK(res.loss_d >= 0.0);
}

TEST_CASE("bce_logit_losses gradients match finite differences") {
    std::vector<double> real{0.6, 0.3, 0.8}, fake{0.4, 0.7};
    BceResult res = bce_logit_losses(real, fake);

    auto ld_real = [&](const std::vector<double>& r) { return bce_logit_losses(r, fake).loss_d; };
    auto ld_fake = [&](const std::vector<double>& f) { return bce_logit_losses(real, f).loss_d; };
    auto lg_fake = [&](const std::vector<double>& f) { return bce_logit_losses(real, f).loss_g; };
    CHECK(testutil::max_rel_err(res.d_loss_d_real, testutil::finite_diff(ld_real, real)) < 1e-4);
    CHECK(testutil::max_rel_err(res.d_loss_d_fake, testutil::finite_diff(ld_fake, fake)) < 1e-4);
    CHECK(testutil::max_rel_err(res.d_loss_g_fake, testutil::finite_diff(lg_fake, fake)) < 1e-4);
}

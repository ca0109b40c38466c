#include "adbench/losses.hpp"

#include <cmath>

#include "adbench/errors.hpp"

namespace adbench {

MseResult mse_recon_loss(const Matrix& x, const Matrix& x_hat) {
    if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols())
        throw ConfigError("mse_recon_loss: shape mismatch");
    MseResult res;
    res.grad = Matrix(x.rows(), x.cols());
    double n = static_cast<double>(x.rows());
    double total = 0.0;
    for (std::size_t i = 0; i < x.data().size(); ++i) {
        double d = x_hat.data()[i] - x.data()[i];
        total += d * d;
        res.grad.data()[i] = 2.0 * d / n;
    }
    res.value = total / n;
    return res;
}

std::vector<double> rowwise_squared_error(const Matrix& x, const Matrix& x_hat) {
    if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols())
        throw ConfigError("rowwise_squared_error: shape mismatch");
    std::vector<double> out(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto a = x.row(i);
        auto b = x_hat.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            double d = a[j] - b[j];
            s += d * d;
        }
        out[i] = s;
    }
    return out;
}

KlResult kl_gauss(std::span<const double> mu, std::span<const double> logvar) {
    if (mu.size() != logvar.size()) throw ConfigError("kl_gauss: length mismatch");
    KlResult res;
    res.d_mu.resize(mu.size());
    res.d_logvar.resize(mu.size());
    double total = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!std::isfinite(mu[i]) || !std::isfinite(logvar[i]))
            throw TrainingError("kl_gauss: non-finite input");
        double var = std::exp(logvar[i]);
        total += mu[i] * mu[i] + var - logvar[i] - 1.0;
        res.d_mu[i] = mu[i];
        res.d_logvar[i] = 0.5 * (var - 1.0);
    }
    res.value = 0.5 * total;
    return res;
}

BatchKlResult kl_gauss_batch(const Matrix& mu, const Matrix& logvar) {
    if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols())
        throw ConfigError("kl_gauss_batch: shape mismatch");
    BatchKlResult res;
    res.d_mu = Matrix(mu.rows(), mu.cols());
    res.d_logvar = Matrix(mu.rows(), mu.cols());
    double n = static_cast<double>(mu.rows());
    double total = 0.0;
    for (std::size_t i = 0; i < mu.rows(); ++i) {
        KlResult row = kl_gauss(mu.row(i), logvar.row(i));
        total += row.value;
        for (std::size_t j = 0; j < mu.cols(); ++j) {
            res.d_mu(i, j) = row.d_mu[j] / n;
            res.d_logvar(i, j) = row.d_logvar[j] / n;
        }
    }
    res.value = total / n;
    return res;
}

BceResult bce_logit_losses(std::span<const double> d_real, std::span<const double> d_fake) {
    BceResult res;
    res.d_loss_d_real.resize(d_real.size());
    res.d_loss_d_fake.resize(d_fake.size());
    res.d_loss_g_fake.resize(d_fake.size());
    double nr = static_cast<double>(d_real.size());
    double nf = static_cast<double>(d_fake.size());
    double sum_real = 0.0;
    for (std::size_t i = 0; i < d_real.size(); ++i) {
        double p = clamp_prob(d_real[i]);
        sum_real += std::log(p);
        res.d_loss_d_real[i] = -1.0 / (nr * p);
    }
    double sum_fake_d = 0.0, sum_fake_g = 0.0;
    for (std::size_t i = 0; i < d_fake.size(); ++i) {
        double p = clamp_prob(d_fake[i]);
        sum_fake_d += std::log(1.0 - p);
        sum_fake_g += std::log(p);
        res.d_loss_d_fake[i] = 1.0 / (nf * (1.0 - p));
        res.d_loss_g_fake[i] = -1.0 / (nf * p);
    }
    res.loss_d = -(d_real.empty() ? 0.0 : sum_real / nr) -
                 (d_fake.empty() ? 0.0 : sum_fake_d / nf);
    res.loss_g = -(d_fake.empty() ? 0.0 : sum_fake_g / nf);
    return res;
}

}  // namespace adbench

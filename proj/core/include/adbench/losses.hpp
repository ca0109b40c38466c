#pragma once

#include <span>
#include <vector>

#include "adbench/matrix.hpp"

namespace adbench {

/// Probabilities are clamped to this interval before any log to keep the
/// adversarial losses finite.
inline constexpr double kProbClamp = 1e-7;

inline double clamp_prob(double p) {
    if (p < kProbClamp) return kProbClamp;
    if (p > 1.0 - kProbClamp) return 1.0 - kProbClamp;
    return p;
}

struct MseResult {
    double value = 0.0;  // mean over the batch of per-sample squared L2 error
    Matrix grad;         // dValue/dx_hat
};

/// Reconstruction error: per-sample ||x - x_hat||^2, averaged over the batch.
MseResult mse_recon_loss(const Matrix& x, const Matrix& x_hat);

/// Per-sample squared reconstruction errors (no batch averaging); used by the
/// autoencoder score functions.
std::vector<double> rowwise_squared_error(const Matrix& x, const Matrix& x_hat);

struct KlResult {
    double value = 0.0;
    std::vector<double> d_mu;
    std::vector<double> d_logvar;
};

/// KL(N(mu, sigma^2) || N(0, I)) = 1/2 * sum(mu^2 + sigma^2 - log sigma^2 - 1)
/// with sigma^2 = exp(logvar). Nonnegative; zero iff mu = 0 and sigma = 1.
KlResult kl_gauss(std::span<const double> mu, std::span<const double> logvar);

struct BatchKlResult {
    double value = 0.0;  // mean over rows
    Matrix d_mu;
    Matrix d_logvar;
};

/// Row-wise kl_gauss averaged over the batch.
BatchKlResult kl_gauss_batch(const Matrix& mu, const Matrix& logvar);

struct BceResult {
    double loss_d = 0.0;  // -mean log d(x) - mean log(1 - d(g(z)))
    double loss_g = 0.0;  // -mean log d(g(z))
    std::vector<double> d_loss_d_real;  // dL_d / d p_real
    std::vector<double> d_loss_d_fake;  // dL_d / d p_fake
    std::vector<double> d_loss_g_fake;  // dL_g / d p_fake
};

/// Discriminator / generator cross-entropy losses on sigmoid outputs.
/// Inputs are probabilities; they are clamped before the logs.
BceResult bce_logit_losses(std::span<const double> d_real, std::span<const double> d_fake);

}  // namespace adbench

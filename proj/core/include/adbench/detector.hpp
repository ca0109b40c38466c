#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "adbench/iforest.hpp"
#include "adbench/kdtree.hpp"
#include "adbench/matrix.hpp"
#include "adbench/mlp.hpp"

namespace adbench {

enum class Algorithm { Knn, IForest, Ae, Vae, Gan, FmGan };

std::string to_string(Algorithm a);        // "knn", "iforest", ...
std::string display_name(Algorithm a);     // "kNN", "IForest", ...
Algorithm algorithm_from_string(const std::string& s);
const std::vector<Algorithm>& all_algorithms();

/// One point of the hyperparameter grid plus the training protocol knobs.
/// Only the fields relevant to `algorithm` are read.
struct DetectorConfig {
    Algorithm algorithm = Algorithm::Knn;

    int k = 1;  // knn

    int n_trees = 100;  // iforest
    int subsample = 256;
    bool iforest_path_adjustment = true;

    int latent_dim = 1;  // deep models
    int hidden_layers = 1;
    int steps = 10000;
    int batch_size = 256;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;

    double kl_weight = 1.0;  // vae
    bool vae_code_likelihood_score = false;

    double score_mix = 0.0;            // gan/fmgan lambda in the mixed score
    double feature_match_weight = 1.0; // fmgan alpha
    int score_draws = 16;              // prior draws averaged in score-time reconstruction

    /// Short stable description, e.g. "knn k=5" or "vae z=2 nh=1 lambda=0.001".
    std::string describe() const;
};

/// A fitted anomaly detector. Immutable after fit; score() is a pure function
/// of (fitted state, stored score seed) and is safe to call from multiple
/// threads. Higher scores mean more anomalous.
class TrainedDetector {
public:
    virtual ~TrainedDetector() = default;

    virtual Algorithm algorithm() const = 0;
    virtual std::size_t input_dim() const = 0;
    virtual double score(std::span<const double> x) const = 0;
    virtual std::vector<double> score_batch(const Matrix& m) const;

    /// Versioned self-describing JSON blob for caching.
    virtual void save(std::ostream& out) const = 0;
    static std::unique_ptr<TrainedDetector> load(std::istream& in);

    double fit_seconds = 0.0;
};

class KnnDetector : public TrainedDetector {
public:
    KnnDetector(Matrix train, int k);

    Algorithm algorithm() const override { return Algorithm::Knn; }
    std::size_t input_dim() const override { return tree_.dim(); }
    /// Mean Euclidean distance to the k nearest training points.
    double score(std::span<const double> x) const override;
    void save(std::ostream& out) const override;

    int k() const { return k_; }
    const KdTree& tree() const { return tree_; }

private:
    KdTree tree_;
    int k_;
};

class IForestDetector : public TrainedDetector {
public:
    IForestDetector(const Matrix& train, const DetectorConfig& cfg);
    explicit IForestDetector(IsolationForest forest) : forest_(std::move(forest)) {}

    Algorithm algorithm() const override { return Algorithm::IForest; }
    std::size_t input_dim() const override;
    /// Negative mean path length over the trees.
    double score(std::span<const double> x) const override;
    void save(std::ostream& out) const override;

    const IsolationForest& forest() const { return forest_; }

private:
    IsolationForest forest_;
};

class AeDetector : public TrainedDetector {
public:
    AeDetector(Mlp encoder, Mlp decoder);

    Algorithm algorithm() const override { return Algorithm::Ae; }
    std::size_t input_dim() const override { return encoder_.input_dim(); }
    /// Squared reconstruction error ||x - dec(enc(x))||^2.
    double score(std::span<const double> x) const override;
    std::vector<double> score_batch(const Matrix& m) const override;
    void save(std::ostream& out) const override;

    const Mlp& encoder() const { return encoder_; }
    const Mlp& decoder() const { return decoder_; }

private:
    Mlp encoder_, decoder_;
};

class VaeDetector : public TrainedDetector {
public:
    VaeDetector(Mlp encoder, Mlp decoder, int latent_dim, int score_draws,
                std::uint64_t score_seed, bool code_likelihood_score);

    Algorithm algorithm() const override { return Algorithm::Vae; }
    std::size_t input_dim() const override { return encoder_.input_dim(); }
    double score(std::span<const double> x) const override;
    void save(std::ostream& out) const override;

    /// Monte-Carlo reconstruction error over n_z reparameterized code draws.
    double reconstruction_score(std::span<const double> x, int n_z) const;
    /// Log-likelihood of the code (the encoder mean) under the N(0, I) prior.
    double code_log_likelihood(std::span<const double> x) const;
    /// Encoder outputs for one sample: (mu, log variance).
    std::pair<std::vector<double>, std::vector<double>> encode(std::span<const double> x) const;
    /// n reparameterized code samples z = mu + sigma * eps for one input.
    Matrix draw_codes(std::span<const double> x, int n) const;

    const Mlp& encoder() const { return encoder_; }
    const Mlp& decoder() const { return decoder_; }
    int latent_dim() const { return latent_dim_; }

private:
    Mlp encoder_, decoder_;
    int latent_dim_;
    int score_draws_;
    std::uint64_t score_seed_;
    bool code_likelihood_score_;
};

class GanDetector : public TrainedDetector {
public:
    GanDetector(Algorithm algo, Mlp generator, Mlp discriminator, int latent_dim,
                double score_mix, int score_draws, std::uint64_t score_seed);

    Algorithm algorithm() const override { return algo_; }
    std::size_t input_dim() const override { return discriminator_.input_dim(); }
    double score(std::span<const double> x) const override;
    void save(std::ostream& out) const override;

    /// -(1-lambda) log d(x) + lambda * mean_j ||x - g(z_j)||, z_j ~ N(0, I).
    double score_with(std::span<const double> x, double lambda, int n_z) const;
    double discriminator_prob(std::span<const double> x) const;
    /// Generator samples from n prior draws.
    Matrix generate(int n, std::uint64_t seed) const;

    const Mlp& generator() const { return generator_; }
    const Mlp& discriminator() const { return discriminator_; }

private:
    Algorithm algo_;
    Mlp generator_, discriminator_;
    int latent_dim_;
    double score_mix_;
    int score_draws_;
    std::uint64_t score_seed_;
    Matrix anchors_;  // g(z_j) for the configured score_draws, fixed at fit
};

struct AePair {
    Mlp encoder, decoder;
};
struct GanPair {
    Mlp generator, discriminator;
};

AePair train_autoencoder(const DetectorConfig& cfg, const Matrix& data);
/// Encoder emits (mu, log variance); decoder emits the mean only. Total loss
/// is reconstruction + kl_weight * KL, averaged over the batch.
AePair train_vae(const DetectorConfig& cfg, const Matrix& data);
/// One discriminator step followed by one generator step per iteration;
/// `steps` counts the pairs. feature_matching switches the generator loss to
/// alpha * L_g + mean ||h(x) - h(g(z))|| on the discriminator's penultimate
/// activations.
GanPair train_gan(const DetectorConfig& cfg, const Matrix& data, bool feature_matching);

/// Trains the detector the config describes and records the fit wall time.
std::unique_ptr<TrainedDetector> fit(const DetectorConfig& cfg, const Matrix& train);

/// The tested hyperparameter settings for one algorithm, deduplicated after
/// rounding. d is the data dimension, n the training size.
std::vector<DetectorConfig> hyper_grid(Algorithm algo, int d, int n);

}  // namespace adbench

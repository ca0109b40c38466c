#include "adbench/detector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "adbench/errors.hpp"
#include "adbench/losses.hpp"
#include "adbench/rng.hpp"
#include "json_util.hpp"

namespace adbench {

using detail::json;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Knn: return "knn";
        case Algorithm::IForest: return "iforest";
        case Algorithm::Ae: return "ae";
        case Algorithm::Vae: return "vae";
        case Algorithm::Gan: return "gan";
        case Algorithm::FmGan: return "fmgan";
    }
    return "?";
}

std::string display_name(Algorithm a) {
    switch (a) {
        case Algorithm::Knn: return "kNN";
        case Algorithm::IForest: return "IForest";
        case Algorithm::Ae: return "AE";
        case Algorithm::Vae: return "VAE";
        case Algorithm::Gan: return "GAN";
        case Algorithm::FmGan: return "fmGAN";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    for (Algorithm a : all_algorithms())
        if (s == to_string(a)) return a;
    throw ConfigError("unknown algorithm '" + s + "'");
}

const std::vector<Algorithm>& all_algorithms() {
    static const std::vector<Algorithm> all = {Algorithm::Knn, Algorithm::IForest, Algorithm::Ae,
                                               Algorithm::Vae, Algorithm::Gan, Algorithm::FmGan};
    return all;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::string DetectorConfig::describe() const {
    switch (algorithm) {
        case Algorithm::Knn:
            return "knn k=" + std::to_string(k);
        case Algorithm::IForest:
            return "iforest nt=" + std::to_string(n_trees);
        case Algorithm::Ae:
            return "ae z=" + std::to_string(latent_dim) + " nh=" + std::to_string(hidden_layers);
        case Algorithm::Vae:
            return "vae z=" + std::to_string(latent_dim) + " nh=" + std::to_string(hidden_layers) +
                   " lambda=" + fmt(kl_weight);
        case Algorithm::Gan:
            return "gan z=" + std::to_string(latent_dim) + " nh=" + std::to_string(hidden_layers) +
                   " lambda=" + fmt(score_mix);
        case Algorithm::FmGan:
            return "fmgan z=" + std::to_string(latent_dim) + " nh=" +
                   std::to_string(hidden_layers) + " alpha=" + fmt(feature_match_weight) +
                   " lambda=" + fmt(score_mix);
    }
    return "?";
}

std::vector<double> TrainedDetector::score_batch(const Matrix& m) const {
    std::vector<double> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = score(m.row(i));
    return out;
}

// ---------------------------------------------------------------------------
// kNN

KnnDetector::KnnDetector(Matrix train, int k) : tree_(std::move(train)), k_(k) {
    if (k < 1) throw ConfigError("knn: k must be >= 1");
    if (static_cast<std::size_t>(k) > tree_.size())
        throw ConfigError("knn: k=" + std::to_string(k) + " exceeds training size " +
                          std::to_string(tree_.size()));
}

double KnnDetector::score(std::span<const double> x) const {
    std::vector<double> dists = tree_.knn_distances(x, k_);
    double sum = 0.0;
    for (double d : dists) sum += d;  // ascending order fixed by knn_distances
    return sum / static_cast<double>(k_);
}

// ---------------------------------------------------------------------------
// Isolation forest

IForestDetector::IForestDetector(const Matrix& train, const DetectorConfig& cfg)
    : forest_(train, cfg.n_trees, cfg.subsample, cfg.seed, cfg.iforest_path_adjustment) {}

std::size_t IForestDetector::input_dim() const { return forest_.dim(); }

double IForestDetector::score(std::span<const double> x) const { return forest_.score(x); }

// ---------------------------------------------------------------------------
// fit dispatch

std::unique_ptr<TrainedDetector> fit(const DetectorConfig& cfg, const Matrix& train) {
    if (train.rows() < 2) throw ConfigError("fit: need at least 2 training rows");
    if (train.cols() < 1) throw ConfigError("fit: need at least 1 feature");
    if (!train.all_finite()) throw ConfigError("fit: training data contains non-finite values");

    auto t0 = std::chrono::steady_clock::now();
    std::unique_ptr<TrainedDetector> det;
    std::uint64_t score_seed = fnv1a64("score", cfg.seed);
    switch (cfg.algorithm) {
        case Algorithm::Knn:
            det = std::make_unique<KnnDetector>(train, cfg.k);
            break;
        case Algorithm::IForest:
            det = std::make_unique<IForestDetector>(train, cfg);
            break;
        case Algorithm::Ae: {
            AePair nets = train_autoencoder(cfg, train);
            det = std::make_unique<AeDetector>(std::move(nets.encoder), std::move(nets.decoder));
            break;
        }
        case Algorithm::Vae: {
            AePair nets = train_vae(cfg, train);
            det = std::make_unique<VaeDetector>(std::move(nets.encoder), std::move(nets.decoder),
                                                cfg.latent_dim, cfg.score_draws, score_seed,
                                                cfg.vae_code_likelihood_score);
            break;
        }
        case Algorithm::Gan:
        case Algorithm::FmGan: {
            GanPair nets = train_gan(cfg, train, cfg.algorithm == Algorithm::FmGan);
            det = std::make_unique<GanDetector>(cfg.algorithm, std::move(nets.generator),
                                                std::move(nets.discriminator), cfg.latent_dim,
                                                cfg.score_mix, cfg.score_draws, score_seed);
            break;
        }
    }
    det->fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return det;
}

// ---------------------------------------------------------------------------
// hyperparameter grids

namespace {

std::vector<int> latent_dim_grid(int d) {
    int mtilde = std::min(200, d);
    std::vector<int> dims;
    for (double f : {0.1, 0.2, 0.3, 0.4, 0.5}) {
        int z = static_cast<int>(std::lround(f * static_cast<double>(mtilde)));
        z = std::max(1, std::min(z, 100));
        if (std::find(dims.begin(), dims.end(), z) == dims.end()) dims.push_back(z);
    }
    return dims;
}

}  // namespace

std::vector<DetectorConfig> hyper_grid(Algorithm algo, int d, int n) {
    if (d < 1 || n < 1) throw ConfigError("hyper_grid: d and n must be >= 1");
    std::vector<DetectorConfig> grid;
    DetectorConfig base;
    base.algorithm = algo;

    switch (algo) {
        case Algorithm::Knn: {
            double root = std::sqrt(static_cast<double>(n));
            std::vector<int> ks;
            for (double f : {-1.0, 0.5, 1.0, 1.5, 2.0}) {
                int k = f < 0.0 ? 1 : static_cast<int>(std::lround(f * root));
                k = std::max(1, std::min(k, n));
                if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
            }
            for (int k : ks) {
                DetectorConfig c = base;
                c.k = k;
                grid.push_back(c);
            }
            break;
        }
        case Algorithm::IForest: {
            for (int nt : {100, 500}) {
                DetectorConfig c = base;
                c.n_trees = nt;
                grid.push_back(c);
            }
            break;
        }
        case Algorithm::Ae: {
            for (int z : latent_dim_grid(d))
                for (int nh : {1, 2, 3}) {
                    DetectorConfig c = base;
                    c.latent_dim = z;
                    c.hidden_layers = nh;
                    grid.push_back(c);
                }
            break;
        }
        case Algorithm::Vae: {
            for (int z : latent_dim_grid(d))
                for (int nh : {1, 2, 3})
                    for (double lam : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
                        DetectorConfig c = base;
                        c.latent_dim = z;
                        c.hidden_layers = nh;
                        c.kl_weight = lam;
                        grid.push_back(c);
                    }
            break;
        }
        case Algorithm::Gan: {
            for (int z : latent_dim_grid(d))
                for (int nh : {1, 2, 3})
                    for (double lam : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
                        DetectorConfig c = base;
                        c.latent_dim = z;
                        c.hidden_layers = nh;
                        c.score_mix = lam;
                        grid.push_back(c);
                    }
            break;
        }
        case Algorithm::FmGan: {
            for (int z : latent_dim_grid(d))
                for (int nh : {1, 2, 3})
                    for (double alpha : {1e-4, 1e-2, 1.0, 1e2, 1e4})
                        for (double lam : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
                            DetectorConfig c = base;
                            c.latent_dim = z;
                            c.hidden_layers = nh;
                            c.feature_match_weight = alpha;
                            c.score_mix = lam;
                            grid.push_back(c);
                        }
            break;
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// serialization

namespace detail {

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.data().size()) throw ParseError("matrix blob: size mismatch");
    m.data() = std::move(data);
    return m;
}

json mlp_to_json(const Mlp& net) {
    json layers = json::array();
    for (const auto& l : net.layers()) {
        const char* act = l.activation == Activation::Relu      ? "relu"
                          : l.activation == Activation::Sigmoid ? "sigmoid"
                                                                : "linear";
        layers.push_back(json{{"weight", matrix_to_json(l.weight)},
                              {"bias", l.bias},
                              {"activation", act}});
    }
    return json{{"seed", net.seed()}, {"layers", layers}};
}

Mlp mlp_from_json(const json& j) {
    std::vector<int> sizes;
    std::vector<Layer> layers;
    for (const auto& lj : j.at("layers")) {
        Layer l;
        l.weight = matrix_from_json(lj.at("weight"));
        l.bias = lj.at("bias").get<std::vector<double>>();
        std::string act = lj.at("activation").get<std::string>();
        l.activation = act == "relu"      ? Activation::Relu
                       : act == "sigmoid" ? Activation::Sigmoid
                                          : Activation::Linear;
        layers.push_back(std::move(l));
    }
    if (layers.empty()) throw ParseError("mlp blob: no layers");
    sizes.push_back(static_cast<int>(layers.front().weight.cols()));
    for (const auto& l : layers) sizes.push_back(static_cast<int>(l.weight.rows()));
    Mlp net = Mlp::create(sizes, Activation::Linear, Activation::Linear,
                          j.at("seed").get<std::uint64_t>());
    for (std::size_t i = 0; i < layers.size(); ++i) net.layers()[i] = std::move(layers[i]);
    return net;
}

json config_to_json(const DetectorConfig& cfg) {
    return json{{"algorithm", to_string(cfg.algorithm)},
                {"k", cfg.k},
                {"n_trees", cfg.n_trees},
                {"subsample", cfg.subsample},
                {"iforest_path_adjustment", cfg.iforest_path_adjustment},
                {"latent_dim", cfg.latent_dim},
                {"hidden_layers", cfg.hidden_layers},
                {"steps", cfg.steps},
                {"batch_size", cfg.batch_size},
                {"learning_rate", cfg.learning_rate},
                {"seed", cfg.seed},
                {"kl_weight", cfg.kl_weight},
                {"vae_code_likelihood_score", cfg.vae_code_likelihood_score},
                {"score_mix", cfg.score_mix},
                {"feature_match_weight", cfg.feature_match_weight},
                {"score_draws", cfg.score_draws}};
}

DetectorConfig config_from_json(const json& j) {
    DetectorConfig cfg;
    cfg.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    cfg.k = j.at("k").get<int>();
    cfg.n_trees = j.at("n_trees").get<int>();
    cfg.subsample = j.at("subsample").get<int>();
    cfg.iforest_path_adjustment = j.at("iforest_path_adjustment").get<bool>();
    cfg.latent_dim = j.at("latent_dim").get<int>();
    cfg.hidden_layers = j.at("hidden_layers").get<int>();
    cfg.steps = j.at("steps").get<int>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.kl_weight = j.at("kl_weight").get<double>();
    cfg.vae_code_likelihood_score = j.at("vae_code_likelihood_score").get<bool>();
    cfg.score_mix = j.at("score_mix").get<double>();
    cfg.feature_match_weight = j.at("feature_match_weight").get<double>();
    cfg.score_draws = j.at("score_draws").get<int>();
    return cfg;
}

}  // namespace detail

namespace {

constexpr const char* kBlobMagic = "adbench-detector";
constexpr int kBlobVersion = 1;

json blob_header(Algorithm a) {
    return json{{"magic", kBlobMagic}, {"version", kBlobVersion}, {"algorithm", to_string(a)}};
}

}  // namespace

struct IsolationForestSerializer {
    static json dump(const IsolationForest& f) {
        json trees = json::array();
        for (const auto& tree : f.trees_) {
            json nodes = json::array();
            for (const auto& n : tree)
                nodes.push_back(json::array(
                    {n.split_dim, n.threshold, n.left, n.right, n.size}));
            trees.push_back(std::move(nodes));
        }
        return json{{"trees", trees},
                    {"dim", f.dim_},
                    {"height_limit", f.height_limit_},
                    {"subsample", f.subsample_},
                    {"adjust", f.adjust_}};
    }
    static IsolationForest parse(const json& j) {
        IsolationForest f;
        f.dim_ = j.at("dim").get<std::size_t>();
        f.height_limit_ = j.at("height_limit").get<int>();
        f.subsample_ = j.at("subsample").get<int>();
        f.adjust_ = j.at("adjust").get<bool>();
        for (const auto& tj : j.at("trees")) {
            IsolationForest::Tree tree;
            for (const auto& nj : tj) {
                IsolationForest::Node n;
                n.split_dim = nj.at(0).get<int>();
                n.threshold = nj.at(1).get<double>();
                n.left = nj.at(2).get<int>();
                n.right = nj.at(3).get<int>();
                n.size = nj.at(4).get<std::uint32_t>();
                tree.push_back(n);
            }
            f.trees_.push_back(std::move(tree));
        }
        return f;
    }
};

void KnnDetector::save(std::ostream& out) const {
    json j = blob_header(Algorithm::Knn);
    j["k"] = k_;
    j["points"] = detail::matrix_to_json(tree_.points());
    out << j.dump() << '\n';
}

void IForestDetector::save(std::ostream& out) const {
    json j = blob_header(Algorithm::IForest);
    j["forest"] = IsolationForestSerializer::dump(forest_);
    out << j.dump() << '\n';
}

std::unique_ptr<TrainedDetector> TrainedDetector::load(std::istream& in) {
    json j = json::parse(in);
    if (j.value("magic", "") != kBlobMagic) throw ParseError("detector blob: bad magic");
    if (j.value("version", 0) != kBlobVersion) throw ParseError("detector blob: bad version");
    Algorithm algo = algorithm_from_string(j.at("algorithm").get<std::string>());
    switch (algo) {
        case Algorithm::Knn:
            return std::make_unique<KnnDetector>(detail::matrix_from_json(j.at("points")),
                                                 j.at("k").get<int>());
        case Algorithm::IForest:
            return std::make_unique<IForestDetector>(
                IsolationForestSerializer::parse(j.at("forest")));
        case Algorithm::Ae:
            return std::make_unique<AeDetector>(detail::mlp_from_json(j.at("encoder")),
                                                detail::mlp_from_json(j.at("decoder")));
        case Algorithm::Vae:
            return std::make_unique<VaeDetector>(
                detail::mlp_from_json(j.at("encoder")), detail::mlp_from_json(j.at("decoder")),
                j.at("latent_dim").get<int>(), j.at("score_draws").get<int>(),
                j.at("score_seed").get<std::uint64_t>(), j.at("code_likelihood").get<bool>());
        case Algorithm::Gan:
        case Algorithm::FmGan:
            return std::make_unique<GanDetector>(
                algo, detail::mlp_from_json(j.at("generator")),
                detail::mlp_from_json(j.at("discriminator")), j.at("latent_dim").get<int>(),
                j.at("score_mix").get<double>(), j.at("score_draws").get<int>(),
                j.at("score_seed").get<std::uint64_t>());
    }
    throw ParseError("detector blob: unknown algorithm");
}

void AeDetector::save(std::ostream& out) const {
    json j = blob_header(Algorithm::Ae);
    j["encoder"] = detail::mlp_to_json(encoder_);
    j["decoder"] = detail::mlp_to_json(decoder_);
    out << j.dump() << '\n';
}

void VaeDetector::save(std::ostream& out) const {
    json j = blob_header(Algorithm::Vae);
    j["encoder"] = detail::mlp_to_json(encoder_);
    j["decoder"] = detail::mlp_to_json(decoder_);
    j["latent_dim"] = latent_dim_;
    j["score_draws"] = score_draws_;
    j["score_seed"] = score_seed_;
    j["code_likelihood"] = code_likelihood_score_;
    out << j.dump() << '\n';
}

void GanDetector::save(std::ostream& out) const {
    json j = blob_header(algo_);
    j["generator"] = detail::mlp_to_json(generator_);
    j["discriminator"] = detail::mlp_to_json(discriminator_);
    j["latent_dim"] = latent_dim_;
    j["score_mix"] = score_mix_;
    j["score_draws"] = score_draws_;
    j["score_seed"] = score_seed_;
    out << j.dump() << '\n';
}

}  // namespace adbench

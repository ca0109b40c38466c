#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "adbench/dataset.hpp"
#include "adbench/detector.hpp"
#include "adbench/errors.hpp"
#include "testutil.hpp"

using namespace adbench;

TEST_CASE("knn detector: hand example on the line") {
    // train {0, 1}, k=2, query 3 -> (3 + 2) / 2 = 2.5
    Matrix train = Matrix::from_rows({{0.0}, {1.0}});
    KnnDetector det(train, 2);
    std::vector<double> q{3.0};
    CHECK(det.score(q) == doctest::Approx(2.5).epsilon(1e-15));

    // query equal to a training point with k=1 scores zero
    KnnDetector det1(train, 1);
    std::vector<double> at{1.0};
    CHECK(det1.score(at) == 0.0);
}

TEST_CASE("knn scores match the brute-force oracle exactly") {
    adbench::Rng rng(555);
    Matrix train = testutil::random_matrix(500, 4, 777);
    for (int k : {1, 3, 7, 20}) {
        DetectorConfig cfg;
        cfg.algorithm = Algorithm::Knn;
        cfg.k = k;
        auto det = fit(cfg, train);
        for (int q = 0; q < 25; ++q) {
            Matrix query = testutil::random_matrix(1, 4, rng.next_u64());
            auto dists = testutil::brute_knn_distances(train, query.row(0), k);
            double want = 0.0;
            for (double d : dists) want += d;
            want /= static_cast<double>(k);
            CHECK(det->score(query.row(0)) == want);
        }
    }
}

TEST_CASE("knn k greater than n is a configuration error") {
    Matrix train = testutil::random_matrix(10, 2, 1);
    DetectorConfig cfg;
    cfg.algorithm = Algorithm::Knn;
    cfg.k = 11;
    CHECK_THROWS_AS(fit(cfg, train), ConfigError);
}

TEST_CASE("fit rejects degenerate training sets") {
    DetectorConfig cfg;
    cfg.algorithm = Algorithm::Knn;
    CHECK_THROWS_AS(fit(cfg, Matrix(1, 2)), ConfigError);
    Matrix bad(3, 1);
    bad(1, 0) = std::nan("");
    CHECK_THROWS_AS(fit(cfg, bad), ConfigError);
}

TEST_CASE("iforest detector via fit: forest shape and fit time recorded") {
    adbench::Rng rng(31);
    Matrix train(256, 2);
    for (double& v : train.data()) v = rng.normal();
    DetectorConfig cfg;
    cfg.algorithm = Algorithm::IForest;
    cfg.n_trees = 100;
    cfg.seed = 5;
    auto det = fit(cfg, train);
    const auto& forest = dynamic_cast<const IForestDetector&>(*det).forest();
    CHECK(forest.tree_count() == 100);
    CHECK(forest.max_depth() <= 8);
    CHECK(det->fit_seconds >= 0.0);
}

TEST_CASE("hyper_grid: knn for n=100") {
    auto grid = hyper_grid(Algorithm::Knn, 10, 100);
    std::vector<int> ks;
    for (const auto& c : grid) ks.push_back(c.k);
    CHECK(ks == std::vector<int>{1, 5, 10, 15, 20});
}

TEST_CASE("hyper_grid: knn deduplicates and clamps") {
    auto grid = hyper_grid(Algorithm::Knn, 2, 4);  // sqrt(4)=2 -> {1,1,2,3,4}
    std::vector<int> ks;
    for (const auto& c : grid) ks.push_back(c.k);
    CHECK(ks == std::vector<int>{1, 2, 3, 4});
    for (const auto& c : grid) CHECK(c.k <= 4);
}

TEST_CASE("hyper_grid: iforest has two tree counts") {
    auto grid = hyper_grid(Algorithm::IForest, 10, 1000);
    REQUIRE(grid.size() == 2);
    CHECK(grid[0].n_trees == 100);
    CHECK(grid[1].n_trees == 500);
}

TEST_CASE("hyper_grid: deep grids at d=50 have the documented sizes") {
    CHECK(hyper_grid(Algorithm::Ae, 50, 1000).size() == 15);     // 5 dims x 3 depths
    CHECK(hyper_grid(Algorithm::Vae, 50, 1000).size() == 75);    // x 5 lambdas
    CHECK(hyper_grid(Algorithm::Gan, 50, 1000).size() == 90);    // x 6 lambdas
    CHECK(hyper_grid(Algorithm::FmGan, 50, 1000).size() == 450); // x 5 alphas x 6 lambdas
}

TEST_CASE("hyper_grid: latent dims are rounded, deduplicated, capped") {
    // d=4: 0.1*4 .. 0.5*4 -> {0,1,1,2,2} -> clamp >= 1 -> {1, 2}
    auto grid = hyper_grid(Algorithm::Ae, 4, 100);
    std::set<int> dims;
    for (const auto& c : grid) dims.insert(c.latent_dim);
    CHECK(dims == std::set<int>{1, 2});
    CHECK(grid.size() == 6);

    // very wide data: dims come from min(200, d) and never exceed 100
    auto wide = hyper_grid(Algorithm::Ae, 5000, 100);
    std::set<int> wdims;
    for (const auto& c : wide) wdims.insert(c.latent_dim);
    CHECK(wdims == std::set<int>{20, 40, 60, 80, 100});
}

TEST_CASE("hyper_grid rejects unknown sizes") {
    CHECK_THROWS_AS(hyper_grid(Algorithm::Knn, 0, 10), ConfigError);
    CHECK_THROWS_AS(hyper_grid(Algorithm::Knn, 3, 0), ConfigError);
}

TEST_CASE("algorithm names round-trip") {
    for (Algorithm a : all_algorithms()) CHECK(algorithm_from_string(to_string(a)) == a);
    CHECK_THROWS_AS(algorithm_from_string("pca"), ConfigError);
    CHECK(display_name(Algorithm::FmGan) == "fmGAN");
}

TEST_CASE("knn detector serialization round trip scores identically") {
    Matrix train = testutil::random_matrix(60, 3, 17);
    DetectorConfig cfg;
    cfg.algorithm = Algorithm::Knn;
    cfg.k = 4;
    auto det = fit(cfg, train);

    std::stringstream blob;
    det->save(blob);
    auto back = TrainedDetector::load(blob);
    CHECK(back->algorithm() == Algorithm::Knn);
    for (int q = 0; q < 10; ++q) {
        Matrix query = testutil::random_matrix(1, 3, 1000 + q);
        CHECK(back->score(query.row(0)) == det->score(query.row(0)));
    }
}

TEST_CASE("iforest detector serialization round trip scores identically") {
    adbench::Rng rng(3);
    Matrix train(128, 2);
    for (double& v : train.data()) v = rng.normal();
    DetectorConfig cfg;
    cfg.algorithm = Algorithm::IForest;
    cfg.n_trees = 30;
    cfg.seed = 9;
    auto det = fit(cfg, train);

    std::stringstream blob;
    det->save(blob);
    auto back = TrainedDetector::load(blob);
    for (int q = 0; q < 10; ++q) {
        Matrix query = testutil::random_matrix(1, 2, 2000 + q);
        CHECK(back->score(query.row(0)) == det->score(query.row(0)));
    }
}

TEST_CASE("detector blobs reject corrupted headers") {
    std::stringstream blob("{\"magic\":\"something-else\",\"version\":1}");
    CHECK_THROWS_AS(TrainedDetector::load(blob), ParseError);
}

TEST_CASE("score_batch agrees with per-sample scoring") {
    Matrix train = testutil::random_matrix(100, 3, 8);
    DetectorConfig cfg;
    cfg.algorithm = Algorithm::Knn;
    cfg.k = 3;
    auto det = fit(cfg, train);
    Matrix queries = testutil::random_matrix(9, 3, 9);
    auto batch = det->score_batch(queries);
    for (std::size_t i = 0; i < queries.rows(); ++i)
        CHECK(batch[i] == det->score(queries.row(i)));
}

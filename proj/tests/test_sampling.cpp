#include "doctest.h"

#include <filesystem>
#include <set>

#include "adbench/errors.hpp"
#include "adbench/sampling.hpp"
#include "testutil.hpp"

using namespace adbench;
namespace fs = std::filesystem;

namespace {

// two well separated anomaly blobs around (6,6) and (-6,-6)
RawDataset two_cluster_dataset(std::uint64_t seed) {
    adbench::Rng rng(seed);
    RawDataset ds;
    ds.name = "twoclusters";
    int n_norm = 100, n_anom = 40;
    ds.features = Matrix(n_norm + n_anom, 2);
    for (int i = 0; i < n_norm; ++i) {
        ds.features(i, 0) = rng.normal();
        ds.features(i, 1) = rng.normal();
        ds.labels.push_back(0);
        ds.difficulty.push_back(Difficulty::Untagged);
    }
    for (int i = 0; i < n_anom; ++i) {
        double cx = i % 2 ? 6.0 : -6.0;
        ds.features(n_norm + i, 0) = cx + 0.3 * rng.normal();
        ds.features(n_norm + i, 1) = cx + 0.3 * rng.normal();
        ds.labels.push_back(1);
        ds.difficulty.push_back(Difficulty::Easy);
    }
    return ds;
}

}  // namespace

TEST_CASE("anomalies_for_rate applies round-half-up with a floor of one") {
    CHECK(anomalies_for_rate(20, 0.05) == 1);   // 0.05/0.95*20 = 1.05
    CHECK(anomalies_for_rate(80, 0.05) == 4);   // 4.21
    CHECK(anomalies_for_rate(100, 0.0) == 0);
    CHECK(anomalies_for_rate(1, 0.01) == 1);    // floor of one when rate > 0
}

TEST_CASE("sample_benchmark: 100 normals, 5% contamination") {
    RawDataset ds = synth_dataset(100, 20, 2, 4.0, 5, "hundred");
    BenchmarkInstance inst =
        sample_benchmark(ds, DifficultyFilter::any(), 0.05, false, 1, 99);
    CHECK(inst.train.rows() == 80);
    CHECK(inst.test.rows() == 21);  // 20 normals + 1 anomaly
    CHECK(inst.test_anomaly_count() == 1);
    CHECK(inst.spare_anomalies.rows() == 19);
    CHECK(inst.id() == "hundred/r01");
}

TEST_CASE("sample_benchmark: zero contamination gives a clean test set") {
    RawDataset ds = synth_dataset(50, 10, 2, 4.0, 5, "clean");
    BenchmarkInstance inst = sample_benchmark(ds, DifficultyFilter::any(), 0.0, false, 1, 1);
    CHECK(inst.test_anomaly_count() == 0);
}

TEST_CASE("sample_benchmark is deterministic per (seed, index)") {
    RawDataset ds = synth_dataset(100, 30, 3, 4.0, 5, "det");
    BenchmarkInstance a = sample_benchmark(ds, DifficultyFilter::any(), 0.05, false, 2, 7);
    BenchmarkInstance b = sample_benchmark(ds, DifficultyFilter::any(), 0.05, false, 2, 7);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.test_labels == b.test_labels);

    BenchmarkInstance c = sample_benchmark(ds, DifficultyFilter::any(), 0.05, false, 3, 7);
    CHECK_FALSE(a.train == c.train);
}

TEST_CASE("sample_benchmark errors when the anomaly supply is too small") {
    RawDataset ds = synth_dataset(100, 0, 2, 4.0, 5, "dry");
    CHECK_THROWS_WITH_AS(sample_benchmark(ds, DifficultyFilter::any(), 0.05, false, 1, 1),
                         doctest::Contains("unsamplable"), ConfigError);

    // anomalies exist but none match the difficulty filter
    RawDataset tagged = synth_dataset(100, 5, 2, 4.0, 5, "easyonly");
    DifficultyFilter hard_only;
    hard_only.allowed = {Difficulty::Hard};
    CHECK_THROWS_AS(sample_benchmark(tagged, hard_only, 0.05, false, 1, 1), ConfigError);
}

TEST_CASE("sample_benchmark: train is pure and splits partition the normals") {
    RawDataset ds = synth_dataset(200, 40, 2, 6.0, 11, "purity");
    for (int r = 1; r <= 5; ++r) {
        BenchmarkInstance inst =
            sample_benchmark(ds, DifficultyFilter::any(), 0.05, false, r, 3);
        // every train row must match a normal source row, never an anomaly
        std::set<std::pair<double, double>> normal_rows, anomaly_rows;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            auto key = std::make_pair(ds.features(i, 0), ds.features(i, 1));
            (ds.labels[i] == 0 ? normal_rows : anomaly_rows).insert(key);
        }
        std::set<std::pair<double, double>> train_rows;
        for (std::size_t i = 0; i < inst.train.rows(); ++i) {
            auto key = std::make_pair(inst.train(i, 0), inst.train(i, 1));
            CHECK(normal_rows.count(key) == 1);
            CHECK(anomaly_rows.count(key) == 0);
            train_rows.insert(key);
        }
        // test normals are disjoint from train normals
        std::size_t test_normals = 0;
        for (std::size_t i = 0; i < inst.test.rows(); ++i) {
            if (inst.test_labels[i] != 0) continue;
            ++test_normals;
            CHECK(train_rows.count({inst.test(i, 0), inst.test(i, 1)}) == 0);
        }
        CHECK(train_rows.size() + test_normals == 200);
        // realized contamination within one sample of the requested rate
        double realized = static_cast<double>(inst.test_anomaly_count()) /
                          static_cast<double>(inst.test.rows());
        double one_sample = 1.0 / static_cast<double>(inst.test.rows());
        CHECK(std::fabs(realized - 0.05) <= one_sample);
    }
}

TEST_CASE("clustered sampling picks tighter anomaly sets than uniform") {
    auto max_pairwise = [](const Matrix& m, const std::vector<std::size_t>& rows) {
        double best = 0.0;
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b = a + 1; b < rows.size(); ++b)
                best = std::max(best, euclidean(m.row(rows[a]), m.row(rows[b])));
        return best;
    };
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        RawDataset ds = two_cluster_dataset(seed);
        BenchmarkInstance clustered =
            sample_benchmark(ds, DifficultyFilter::any(), 0.3, true, 1, seed);
        BenchmarkInstance uniform =
            sample_benchmark(ds, DifficultyFilter::any(), 0.3, false, 1, seed);

        auto anomaly_rows = [](const BenchmarkInstance& inst) {
            std::vector<std::size_t> rows;
            for (std::size_t i = 0; i < inst.test_labels.size(); ++i)
                if (inst.test_labels[i] == 1) rows.push_back(i);
            return rows;
        };
        double spread_c = max_pairwise(clustered.test, anomaly_rows(clustered));
        double spread_u = max_pairwise(uniform.test, anomaly_rows(uniform));
        if (spread_c <= spread_u) ++wins;
    }
    CHECK(wins >= 9);
}

TEST_CASE("make_tuning_set injects at the requested rate") {
    RawDataset ds = synth_dataset(100, 20, 2, 4.0, 5, "inj");
    BenchmarkInstance inst = sample_benchmark(ds, DifficultyFilter::any(), 0.05, false, 1, 99);
    REQUIRE(inst.train.rows() == 80);
    TuningSet ts = make_tuning_set(inst, 0.05, 42);
    CHECK(ts.features.rows() == 84);  // 80 normals + round(0.0526*80)=4 anomalies
    std::size_t anoms = 0;
    for (int l : ts.labels) anoms += (l == 1);
    CHECK(anoms == 4);
    CHECK_FALSE(ts.reused_test_anomalies);
}

TEST_CASE("make_tuning_set: rate zero is an error") {
    RawDataset ds = synth_dataset(50, 10, 2, 4.0, 5, "z");
    BenchmarkInstance inst = sample_benchmark(ds, DifficultyFilter::any(), 0.05, false, 1, 1);
    CHECK_THROWS_AS(make_tuning_set(inst, 0.0, 1), ConfigError);
}

TEST_CASE("make_tuning_set is deterministic and flags test-anomaly reuse") {
    RawDataset ds = synth_dataset(100, 20, 2, 4.0, 5, "re");
    BenchmarkInstance inst = sample_benchmark(ds, DifficultyFilter::any(), 0.05, false, 1, 99);
    TuningSet a = make_tuning_set(inst, 0.05, 7);
    TuningSet b = make_tuning_set(inst, 0.05, 7);
    CHECK(a.features == b.features);

    // drain the spare pool: now injection must reuse test anomalies
    inst.spare_anomalies = Matrix(0, 2);
    TuningSet c = make_tuning_set(inst, 0.05, 7);
    CHECK(c.reused_test_anomalies);
    std::size_t anoms = 0;
    for (int l : c.labels) anoms += (l == 1);
    CHECK(anoms >= 1);

    // no anomalies anywhere -> error
    BenchmarkInstance clean = sample_benchmark(ds, DifficultyFilter::any(), 0.0, false, 1, 1);
    clean.spare_anomalies = Matrix(0, 2);
    CHECK_THROWS_AS(make_tuning_set(clean, 0.05, 1), ConfigError);
}

TEST_CASE("make_tuning_set spare-pool injections avoid test anomalies") {
    RawDataset ds = synth_dataset(100, 30, 2, 4.0, 5, "disjoint");
    BenchmarkInstance inst = sample_benchmark(ds, DifficultyFilter::any(), 0.05, false, 1, 3);
    TuningSet ts = make_tuning_set(inst, 0.05, 11);
    REQUIRE_FALSE(ts.reused_test_anomalies);

    std::set<std::pair<double, double>> test_anoms;
    for (std::size_t i = 0; i < inst.test_labels.size(); ++i)
        if (inst.test_labels[i] == 1)
            test_anoms.insert({inst.test(i, 0), inst.test(i, 1)});
    for (std::size_t i = 0; i < ts.labels.size(); ++i)
        if (ts.labels[i] == 1)
            CHECK(test_anoms.count({ts.features(i, 0), ts.features(i, 1)}) == 0);
}

TEST_CASE("instance save/load round trip") {
    RawDataset ds = synth_dataset(60, 15, 3, 4.0, 5, "io");
    BenchmarkInstance inst = sample_benchmark(ds, DifficultyFilter::any(), 0.05, true, 4, 123);
    fs::path dir = fs::temp_directory_path() / "adbench_instance_test" / "io" / "r04";
    fs::remove_all(dir.parent_path().parent_path());
    save_instance(inst, dir, "digest=test");

    BenchmarkInstance back = load_instance(dir);
    CHECK(back.train == inst.train);
    CHECK(back.test == inst.test);
    CHECK(back.test_labels == inst.test_labels);
    CHECK(back.spare_anomalies == inst.spare_anomalies);
    CHECK(back.source_name == inst.source_name);
    CHECK(back.resample_index == 4);
    CHECK(back.clustered == true);
    CHECK(back.contamination == inst.contamination);
}

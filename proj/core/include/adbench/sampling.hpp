#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adbench/dataset.hpp"
#include "adbench/matrix.hpp"

namespace adbench {

/// Which anomaly difficulty tags are eligible for sampling. An empty set
/// means "any".
struct DifficultyFilter {
    std::set<Difficulty> allowed;

    bool allows(Difficulty d) const { return allowed.empty() || allowed.count(d) > 0; }
    static DifficultyFilter any() { return {}; }
    std::string str() const;
    static DifficultyFilter parse(const std::string& s);
};

/// One sampled benchmark: a clean training split (normals only) and a
/// contaminated test split, plus the spare anomaly pool available for tuning
/// set injection.
struct BenchmarkInstance {
    Matrix train;                  // normals only
    Matrix test;
    std::vector<int> test_labels;  // 0 / 1
    Matrix spare_anomalies;        // eligible anomalies not placed in the test set

    std::string source_name;
    int resample_index = 1;
    double contamination = 0.05;
    DifficultyFilter filter;
    bool clustered = false;
    std::uint64_t seed = 0;

    std::string id() const;
    std::size_t test_anomaly_count() const;
};

/// Training normals plus a small injected anomaly sample; used only for
/// hyperparameter selection.
struct TuningSet {
    Matrix features;
    std::vector<int> labels;
    std::string instance_id;
    double injection_rate = 0.05;
    std::uint64_t seed = 0;
    bool reused_test_anomalies = false;  // set when the spare pool was too small
};

/// Counting rule shared by the samplers: anomalies needed so they make up
/// `rate` of the final set when joined with `base` clean rows. Round half up,
/// at least 1 whenever rate > 0.
std::size_t anomalies_for_rate(std::size_t base, double rate);

/// Splits normals 80/20 at random, then adds anomalies to the test split so
/// they make up `contamination` of it. Unclustered draws are uniform;
/// clustered sampling picks one seed anomaly and its nearest anomalous
/// neighbours. Deterministic in (seed, resample_index). Throws ConfigError
/// ("unsamplable") when the eligible anomaly supply is too small.
BenchmarkInstance sample_benchmark(const RawDataset& raw, const DifficultyFilter& filter,
                                   double contamination, bool clustered, int resample_index,
                                   std::uint64_t seed);

/// Train normals plus injected anomalies, drawn from the instance's spare
/// pool when it suffices, otherwise reusing test anomalies with a warning
/// flag. Throws when rate <= 0 or no anomalies exist at all.
TuningSet make_tuning_set(const BenchmarkInstance& instance, double injection_rate,
                          std::uint64_t seed);

/// On-disk layout: <dir>/train.csv, test.csv, meta.json, anomalies.csv
/// (spare pool; absent when empty).
void save_instance(const BenchmarkInstance& instance, const std::filesystem::path& dir,
                   const std::string& run_digest = "");
BenchmarkInstance load_instance(const std::filesystem::path& dir);

}  // namespace adbench

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "adbench/result_store.hpp"
#include "adbench/sampling.hpp"

namespace adbench {

struct RunOptions {
    int workers = 1;
    std::uint64_t global_seed = 0;
    double inject_rate = 0.05;  // tuning set anomaly fraction
    int limit = -1;             // stop after this many new records (< 0: unlimited)
    std::optional<int> steps_override;
    std::optional<int> batch_override;
    std::function<void(const ExperimentKey&, bool failed)> on_record;  // progress hook
};

/// Fits on the instance's clean training split, scores the test and tuning
/// sets, and computes the four selection metrics. Detector failures (NaN
/// blow-ups) yield a failed record instead of propagating.
ExperimentRecord run_experiment(const BenchmarkInstance& instance, const TuningSet& tuning,
                                DetectorConfig config, const ExperimentKey& key);

struct RunSummary {
    std::size_t executed = 0;
    std::size_t skipped = 0;  // keys already present
    std::size_t failed = 0;
    bool limit_hit = false;
};

/// Runs every (instance × algorithm × grid config) not yet in the store.
/// Parallel over records; per-record seeds derive from the experiment key so
/// results do not depend on scheduling. The store is canonicalized at the end.
RunSummary run_instances(const std::vector<BenchmarkInstance>& instances,
                         const std::vector<Algorithm>& algorithms, const RunOptions& options,
                         ResultStore& store);

struct GridSpec {
    double contamination = 0.05;
    DifficultyFilter filter;
    bool clustered = false;
    int resamples = 10;
};

/// Samples `resamples` benchmark instances per dataset and runs the full grid
/// over them. Convenience wrapper over sample_benchmark + run_instances.
RunSummary run_grid(const std::vector<RawDataset>& datasets,
                    const std::vector<Algorithm>& algorithms, const GridSpec& grid,
                    const RunOptions& options, ResultStore& store);

/// Seed for one experiment: a stable hash of the key and the global seed, so
/// parallel execution order cannot change any result.
std::uint64_t experiment_seed(const ExperimentKey& key, std::uint64_t global_seed);

}  // namespace adbench

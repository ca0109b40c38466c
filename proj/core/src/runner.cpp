#include "adbench/runner.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "adbench/errors.hpp"
#include "adbench/metrics.hpp"
#include "adbench/rng.hpp"

namespace adbench {

std::uint64_t experiment_seed(const ExperimentKey& key, std::uint64_t global_seed) {
    return fnv1a64(key.str() + "|g" + std::to_string(global_seed));
}

ExperimentRecord run_experiment(const BenchmarkInstance& instance, const TuningSet& tuning,
                                DetectorConfig config, const ExperimentKey& key) {
    ExperimentRecord rec;
    rec.key = key;
    rec.config = config;
    try {
        auto det = fit(config, instance.train);
        rec.fit_seconds = det->fit_seconds;

        auto t0 = std::chrono::steady_clock::now();
        rec.test_scores = det->score_batch(instance.test);
        rec.predict_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.tuning_scores = det->score_batch(tuning.features);

        ExperimentMetrics m;
        m.test_auc = auroc(rec.test_scores, instance.test_labels);
        m.train_auc = auroc(rec.tuning_scores, tuning.labels);
        m.prec_top1 = precision_at_top(rec.tuning_scores, tuning.labels, 1.0);
        m.prec_top5 = precision_at_top(rec.tuning_scores, tuning.labels, 5.0);
        rec.metrics = m;
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.metrics.reset();
        rec.test_scores.clear();
        rec.tuning_scores.clear();
    }
    return rec;
}

RunSummary run_instances(const std::vector<BenchmarkInstance>& instances,
                         const std::vector<Algorithm>& algorithms, const RunOptions& options,
                         ResultStore& store) {
    struct Task {
        const BenchmarkInstance* instance;
        const TuningSet* tuning;
        DetectorConfig config;
        ExperimentKey key;
    };

    // tuning sets are shared by all configs of an instance
    std::vector<TuningSet> tuning_sets;
    tuning_sets.reserve(instances.size());
    for (const auto& inst : instances)
        tuning_sets.push_back(
            make_tuning_set(inst, options.inject_rate,
                            fnv1a64(inst.id() + "|tuning", options.global_seed)));

    RunSummary summary;
    std::vector<Task> tasks;
    for (std::size_t ii = 0; ii < instances.size(); ++ii) {
        const auto& inst = instances[ii];
        for (Algorithm algo : algorithms) {
            auto grid = hyper_grid(algo, static_cast<int>(inst.train.cols()),
                                   static_cast<int>(inst.train.rows()));
            for (std::size_t ci = 0; ci < grid.size(); ++ci) {
                ExperimentKey key{inst.source_name, inst.resample_index, algo,
                                  static_cast<int>(ci)};
                if (store.contains(key)) {
                    ++summary.skipped;
                    continue;
                }
                Task t{&inst, &tuning_sets[ii], grid[ci], key};
                t.config.seed = experiment_seed(key, options.global_seed);
                if (options.steps_override) t.config.steps = *options.steps_override;
                if (options.batch_override) t.config.batch_size = *options.batch_override;
                tasks.push_back(std::move(t));
            }
        }
    }

    std::size_t budget = tasks.size();
    if (options.limit >= 0) budget = std::min<std::size_t>(budget, options.limit);
    summary.limit_hit = budget < tasks.size();
    tasks.resize(budget);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failures{0};
    int workers = std::max(1, options.workers);

    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& t = tasks[i];
            ExperimentRecord rec = run_experiment(*t.instance, *t.tuning, t.config, t.key);
            if (rec.failed) failures.fetch_add(1);
            store.append(rec);
            if (options.on_record) options.on_record(t.key, rec.failed);
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    summary.executed = tasks.size();
    summary.failed = failures.load();
    store.finalize();
    return summary;
}

RunSummary run_grid(const std::vector<RawDataset>& datasets,
                    const std::vector<Algorithm>& algorithms, const GridSpec& grid,
                    const RunOptions& options, ResultStore& store) {
    std::vector<BenchmarkInstance> instances;
    for (const auto& ds : datasets)
        for (int r = 1; r <= grid.resamples; ++r)
            instances.push_back(sample_benchmark(ds, grid.filter, grid.contamination,
                                                 grid.clustered, r, options.global_seed));
    return run_instances(instances, algorithms, options, store);
}

}  // namespace adbench

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "adbench/detector.hpp"

namespace adbench {

struct ExperimentKey {
    std::string dataset;
    int resample = 1;
    Algorithm algorithm = Algorithm::Knn;
    int config_id = 0;

    /// Stable string form, e.g. "synth|r02|knn|cfg003"; also the store sort key.
    std::string str() const;
};

struct ExperimentMetrics {
    double test_auc = 0.0;
    double train_auc = 0.0;   // AUROC on the tuning set
    double prec_top1 = 0.0;   // precision at the top 1% of the tuning set
    double prec_top5 = 0.0;
};

struct ExperimentRecord {
    ExperimentKey key;
    DetectorConfig config;
    std::vector<double> test_scores;
    std::vector<double> tuning_scores;
    std::optional<ExperimentMetrics> metrics;  // absent when failed
    double fit_seconds = 0.0;
    double predict_seconds = 0.0;
    bool failed = false;
    std::string error;
};

/// Append-only experiment store. Two files:
///  - results.jsonl: one canonical JSON object per record (no wall times),
///    rewritten in key order by finalize() so identical runs produce
///    identical bytes regardless of worker count;
///  - timings.jsonl: wall-clock fit/predict sidecar, inherently run-dependent.
class ResultStore {
public:
    ResultStore() = default;

    /// Opens (creating if absent) the store rooted at `dir`. Existing records
    /// are loaded; a torn trailing line from a killed run is ignored.
    static ResultStore open(const std::filesystem::path& dir);

    bool contains(const ExperimentKey& key) const;
    std::size_t size() const { return records_.size(); }

    /// Thread-safe append; persists the record immediately.
    void append(const ExperimentRecord& rec);

    /// Rewrites both files with records sorted by key.
    void finalize();

    const std::map<std::string, ExperimentRecord>& records() const { return records_; }

    /// dataset,algo,resample,config_id,test_auc,train_auc,prec1,prec5,t_f,t_p
    void export_csv(const std::filesystem::path& path) const;

    const std::filesystem::path& directory() const { return dir_; }
    std::filesystem::path results_file() const { return dir_ / "results.jsonl"; }
    std::filesystem::path timings_file() const { return dir_ / "timings.jsonl"; }

private:
    std::filesystem::path dir_;
    std::map<std::string, ExperimentRecord> records_;
    std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
};

std::string record_to_json_line(const ExperimentRecord& rec);
ExperimentRecord record_from_json_line(const std::string& line);

}  // namespace adbench

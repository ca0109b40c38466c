#pragma once

#include <map>
#include <string>
#include <vector>

#include "adbench/result_store.hpp"

namespace adbench {

/// The hyperparameter selection criteria: which metric picks the winning
/// config inside each (dataset, resample, algorithm) cell. The reported value
/// is always that config's test AUROC.
enum class Criterion { TestAuc, TrainAuc, Top5, Top1 };

std::string to_string(Criterion c);          // "test_auc", ...
std::string display_name(Criterion c);       // "test auc", "top 5%", ...
Criterion criterion_from_string(const std::string& s);
const std::vector<Criterion>& all_criteria();

struct CellScore {
    std::string dataset;
    Algorithm algorithm;
    double mean_test_auc = 0.0;  // averaged over resamples
    int resamples_used = 0;
};

struct SelectionResult {
    std::vector<CellScore> cells;
    std::vector<std::string> warnings;  // all-failed cells, excluded
};

/// For each (dataset, resample, algorithm): picks the config maximizing the
/// criterion metric (ties by lowest config index), takes its test AUROC, and
/// averages over resamples. Failed records count as absent configs.
SelectionResult select_and_score(const ResultStore& store, Criterion criterion);

struct TimingRow {
    double mean_fit_seconds = 0.0;
    double mean_predict_seconds = 0.0;
    std::size_t count = 0;
};

/// Arithmetic means over ok records, per algorithm.
std::map<Algorithm, TimingRow> timing_summary(const ResultStore& store);

}  // namespace adbench

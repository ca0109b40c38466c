#include "adbench/selection.hpp"

#include <algorithm>

#include "adbench/errors.hpp"

namespace adbench {

std::string to_string(Criterion c) {
    switch (c) {
        case Criterion::TestAuc: return "test_auc";
        case Criterion::TrainAuc: return "train_auc";
        case Criterion::Top5: return "top_5";
        case Criterion::Top1: return "top_1";
    }
    return "?";
}

std::string display_name(Criterion c) {
    switch (c) {
        case Criterion::TestAuc: return "test auc";
        case Criterion::TrainAuc: return "train auc";
        case Criterion::Top5: return "top 5%";
        case Criterion::Top1: return "top 1%";
    }
    return "?";
}

Criterion criterion_from_string(const std::string& s) {
    for (Criterion c : all_criteria())
        if (s == to_string(c)) return c;
    throw ConfigError("unknown criterion '" + s + "'");
}

const std::vector<Criterion>& all_criteria() {
    static const std::vector<Criterion> all = {Criterion::TestAuc, Criterion::TrainAuc,
                                               Criterion::Top5, Criterion::Top1};
    return all;
}

namespace {

double criterion_metric(const ExperimentMetrics& m, Criterion c) {
    switch (c) {
        case Criterion::TestAuc: return m.test_auc;
        case Criterion::TrainAuc: return m.train_auc;
        case Criterion::Top5: return m.prec_top5;
        case Criterion::Top1: return m.prec_top1;
    }
    return 0.0;
}

}  // namespace

SelectionResult select_and_score(const ResultStore& store, Criterion criterion) {
    if (store.records().empty()) throw ConfigError("select_and_score: empty store");

    // (dataset, algorithm, resample) -> best (criterion value, -config_id, test_auc)
    struct Best {
        double value = -1.0;
        int config_id = -1;
        double test_auc = 0.0;
    };
    std::map<std::pair<std::string, Algorithm>, std::map<int, Best>> cells;

    for (const auto& [keystr, rec] : store.records()) {
        if (rec.failed) continue;  // failed configs are absent, never score 0
        auto& per_resample = cells[{rec.key.dataset, rec.key.algorithm}];
        Best& best = per_resample[rec.key.resample];
        double v = criterion_metric(*rec.metrics, criterion);
        // ties go to the lowest config index; records iterate in key order,
        // which is ascending config_id within a cell
        if (best.config_id < 0 || v > best.value) {
            best.value = v;
            best.config_id = rec.key.config_id;
            best.test_auc = rec.metrics->test_auc;
        }
    }

    SelectionResult out;
    for (const auto& [cell, per_resample] : cells) {
        CellScore cs;
        cs.dataset = cell.first;
        cs.algorithm = cell.second;
        double sum = 0.0;
        for (const auto& [r, best] : per_resample) sum += best.test_auc;
        cs.resamples_used = static_cast<int>(per_resample.size());
        cs.mean_test_auc = sum / static_cast<double>(cs.resamples_used);
        out.cells.push_back(std::move(cs));
    }

    // collect cells whose every record failed
    std::map<std::pair<std::string, Algorithm>, bool> seen_any;
    for (const auto& [keystr, rec] : store.records())
        seen_any[{rec.key.dataset, rec.key.algorithm}] |= !rec.failed;
    for (const auto& [cell, any_ok] : seen_any)
        if (!any_ok)
            out.warnings.push_back("all experiments failed for " + cell.first + "/" +
                                   to_string(cell.second) + "; cell excluded");
    return out;
}

std::map<Algorithm, TimingRow> timing_summary(const ResultStore& store) {
    std::map<Algorithm, TimingRow> rows;
    for (const auto& [keystr, rec] : store.records()) {
        if (rec.failed) continue;
        TimingRow& row = rows[rec.key.algorithm];
        row.mean_fit_seconds += rec.fit_seconds;
        row.mean_predict_seconds += rec.predict_seconds;
        row.count += 1;
    }
    for (auto& [algo, row] : rows) {
        row.mean_fit_seconds /= static_cast<double>(row.count);
        row.mean_predict_seconds /= static_cast<double>(row.count);
    }
    return rows;
}

}  // namespace adbench

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "adbench/cd_diagram.hpp"
#include "adbench/ranking.hpp"
#include "adbench/selection.hpp"

namespace adbench {

/// Arranges per-cell selection output into a rectangular dataset × algorithm
/// table. Throws ConfigError listing every missing (dataset, algorithm) cell.
ScoreTable build_score_table(const SelectionResult& selection,
                             const std::vector<Algorithm>& algorithms);

/// CSV mirroring the per-criterion result tables: one `score(rank)` cell per
/// dataset and algorithm plus an `avg` row. `annotation` becomes a leading
/// `# ...` comment line.
void write_rank_table_csv(const ScoreTable& table, const RankTable& rt,
                          const std::filesystem::path& path, const std::string& annotation);

/// Reads the rank-table CSV back (scores only; ranks are recomputed).
ScoreTable read_rank_table_csv(const std::filesystem::path& path);

/// Criteria × algorithms average-rank summary.
void write_summary_csv(const std::vector<std::pair<Criterion, RankTable>>& rows,
                       const std::filesystem::path& path, const std::string& annotation);

/// Mean fit / predict seconds per algorithm.
void write_timing_csv(const std::map<Algorithm, TimingRow>& rows,
                      const std::filesystem::path& path, const std::string& annotation);

struct FriedmanRow {
    Criterion criterion;
    FriedmanResult result;
    double cd05 = 0.0;
};

void write_friedman_csv(const std::vector<FriedmanRow>& rows, const std::filesystem::path& path,
                        const std::string& annotation);

}  // namespace adbench

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "adbench/ranking.hpp"

namespace adbench {

/// Groups of statistically indistinguishable algorithms: maximal runs of
/// rank-consecutive algorithms whose extreme rank difference is at most cd.
/// Runs whose rank interval is already covered by the union of the other
/// runs' intervals are redundant and suppressed; singletons are omitted.
/// Each group lists original algorithm indices sorted by rank.
std::vector<std::vector<int>> cd_groups(const std::vector<double>& avg_ranks, double cd);

struct CdBar {
    double lo_rank = 0.0, hi_rank = 0.0;
    std::vector<int> members;  // original algorithm indices
    int level = 0;             // vertical stagger for overlapping bars
};

struct CdLayout {
    double axis_lo = 0.0, axis_hi = 0.0;        // integer rank axis bounds
    std::vector<int> order;                     // algorithm indices sorted by rank
    std::vector<CdBar> bars;
};

CdLayout layout_cd(const RankTable& rt, double cd);

/// Renders the critical-difference diagram as SVG 1.1. Output bytes are a
/// pure function of the inputs. `annotation` is embedded as an XML comment
/// (used for run digests). Throws on k < 2 or an unwritable path.
std::string render_cd_svg(const RankTable& rt, double cd, const std::string& annotation = "");
void render_cd_diagram(const RankTable& rt, double cd, const std::filesystem::path& path,
                       const std::string& annotation = "");

}  // namespace adbench

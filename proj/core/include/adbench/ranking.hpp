#pragma once

#include <span>
#include <string>
#include <vector>

#include "adbench/matrix.hpp"

namespace adbench {

/// Datasets × algorithms score matrix. Rectangular, no gaps.
struct ScoreTable {
    std::vector<std::string> datasets;    // row names
    std::vector<std::string> algorithms;  // column names
    Matrix scores;                        // [N × k]
    bool higher_is_better = true;
};

/// Per-row ranks (1 = best) with tie-averaging, plus column averages.
struct RankTable {
    std::vector<std::string> algorithms;
    Matrix row_ranks;                // [N × k]
    std::vector<double> avg_ranks;   // [k]
    int k = 0;  // algorithms
    int n = 0;  // datasets
};

/// Ranks one score row; tied entries share the mean of their positions.
/// Throws on NaN scores or fewer than 2 entries.
std::vector<double> rank_row(std::span<const double> scores, bool higher_is_better);

RankTable average_ranks(const ScoreTable& table);

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
};

/// Friedman chi-square test over a rank table:
/// chi2 = 12N/(k(k+1)) * (sum R_j^2 - k(k+1)^2/4), k-1 degrees of freedom.
/// With `iman_davenport` set, the F refinement
/// F = (N-1) chi2 / (N(k-1) - chi2) with (k-1, (k-1)(N-1)) dof is used.
FriedmanResult friedman_test(const RankTable& rt, bool iman_davenport = false);

/// Critical difference for the Nemenyi post-hoc test:
/// CD = q_alpha * sqrt(k(k+1)/(6N)). The q table covers k in [2, 10] and
/// alpha in {0.05, 0.10}.
double nemenyi_cd(int k, int n, double alpha);

// Tail probabilities used by the tests above (regularized incomplete
// gamma / beta based); exposed for reuse and direct testing.
double chi_squared_sf(double x, int dof);
double f_dist_sf(double x, int d1, int d2);

}  // namespace adbench

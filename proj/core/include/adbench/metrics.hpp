#pragma once

#include <span>
#include <vector>

namespace adbench {

/// Area under the ROC curve via the Mann-Whitney statistic: the probability a
/// random anomaly outscores a random normal, ties counting one half. Requires
/// both classes present.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Fraction of anomalies among the m = max(1, round(p*n/100)) highest-scored
/// samples; score ties are broken by stable index order.
double precision_at_top(std::span<const double> scores, std::span<const int> labels,
                        double percent);

}  // namespace adbench

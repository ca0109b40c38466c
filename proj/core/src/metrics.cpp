#include "adbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adbench/errors.hpp"

namespace adbench {

double auroc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ConfigError("auroc: size mismatch");
    std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw ConfigError("auroc: labels must be 0 or 1");
        n_pos += (l == 1);
    }
    std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw ConfigError("auroc: undefined, both classes must be present");
    for (double s : scores)
        if (!std::isfinite(s)) throw ConfigError("auroc: non-finite score");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // midranks over tied score runs; sum the positive ranks
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        double midrank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]] == 1) rank_sum_pos += midrank;
        i = j + 1;
    }

    double u = rank_sum_pos -
               static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double precision_at_top(std::span<const double> scores, std::span<const int> labels,
                        double percent) {
    if (scores.size() != labels.size()) throw ConfigError("precision_at_top: size mismatch");
    if (scores.empty()) throw ConfigError("precision_at_top: empty input");
    if (percent <= 0.0 || percent > 100.0)
        throw ConfigError("precision_at_top: percent must be in (0, 100]");

    std::size_t n = scores.size();
    auto m = static_cast<std::size_t>(
        std::llround(percent * static_cast<double>(n) / 100.0));
    m = std::max<std::size_t>(1, std::min(m, n));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::size_t hits = 0;
    for (std::size_t i = 0; i < m; ++i) hits += (labels[order[i]] == 1);
    return static_cast<double>(hits) / static_cast<double>(m);
}

}  // namespace adbench

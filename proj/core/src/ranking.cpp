#include "adbench/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "adbench/errors.hpp"

namespace adbench {

namespace {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x),
// series for x < a+1 and continued fraction otherwise.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw ConfigError("gamma_q: invalid arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_contfrac(a, x);
}

// Regularized incomplete beta I_x(a, b) via its continued fraction.
double beta_contfrac(double a, double b, double x) {
    const double tiny = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h;
}

double beta_inc(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_contfrac(a, b, x) / a;
    return 1.0 - front * beta_contfrac(b, a, 1.0 - x) / b;
}

}  // namespace

double chi_squared_sf(double x, int dof) {
    if (dof < 1) throw ConfigError("chi_squared_sf: dof must be >= 1");
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * x);
}

double f_dist_sf(double x, int d1, int d2) {
    if (d1 < 1 || d2 < 1) throw ConfigError("f_dist_sf: dof must be >= 1");
    if (x <= 0.0) return 1.0;
    return beta_inc(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x));
}

std::vector<double> rank_row(std::span<const double> scores, bool higher_is_better) {
    if (scores.size() < 2) throw ConfigError("rank_row: need at least 2 entries");
    for (double s : scores)
        if (std::isnan(s)) throw ConfigError("rank_row: NaN score");

    std::size_t k = scores.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return higher_is_better ? scores[a] > scores[b] : scores[a] < scores[b];
    });

    std::vector<double> ranks(k, 0.0);
    std::size_t i = 0;
    while (i < k) {
        std::size_t j = i;
        while (j + 1 < k && scores[order[j + 1]] == scores[order[i]]) ++j;
        double mid = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
        i = j + 1;
    }
    return ranks;
}

RankTable average_ranks(const ScoreTable& table) {
    if (table.scores.rows() != table.datasets.size() ||
        table.scores.cols() != table.algorithms.size())
        throw ConfigError("average_ranks: table names do not match the score matrix");
    if (table.scores.rows() < 1 || table.scores.cols() < 2)
        throw ConfigError("average_ranks: need at least 1 row and 2 columns");

    RankTable rt;
    rt.algorithms = table.algorithms;
    rt.n = static_cast<int>(table.scores.rows());
    rt.k = static_cast<int>(table.scores.cols());
    rt.row_ranks = Matrix(table.scores.rows(), table.scores.cols());
    rt.avg_ranks.assign(rt.k, 0.0);

    for (std::size_t i = 0; i < table.scores.rows(); ++i) {
        std::vector<double> ranks = rank_row(table.scores.row(i), table.higher_is_better);
        for (std::size_t j = 0; j < ranks.size(); ++j) {
            rt.row_ranks(i, j) = ranks[j];
            rt.avg_ranks[j] += ranks[j];
        }
    }
    for (double& r : rt.avg_ranks) r /= static_cast<double>(rt.n);
    return rt;
}

FriedmanResult friedman_test(const RankTable& rt, bool iman_davenport) {
    if (rt.n < 2 || rt.k < 2) throw ConfigError("friedman_test: need N >= 2 and k >= 2");
    double k = rt.k, n = rt.n;
    double sum_sq = 0.0;
    for (double r : rt.avg_ranks) sum_sq += r * r;
    double chi2 = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
    if (chi2 < 0.0) chi2 = 0.0;  // guard rounding in fully tied tables

    FriedmanResult res;
    if (!iman_davenport) {
        res.statistic = chi2;
        res.dof = rt.k - 1;
        res.p_value = chi_squared_sf(chi2, res.dof);
        return res;
    }
    double denom = n * (k - 1.0) - chi2;
    res.dof = rt.k - 1;
    if (denom <= 0.0) {
        res.statistic = std::numeric_limits<double>::infinity();
        res.p_value = 0.0;
        return res;
    }
    double f = (n - 1.0) * chi2 / denom;
    res.statistic = f;
    res.p_value = f_dist_sf(f, rt.k - 1, (rt.k - 1) * (rt.n - 1));
    return res;
}

double nemenyi_cd(int k, int n, double alpha) {
    if (k < 2 || k > 10) throw ConfigError("nemenyi_cd: k must be in [2, 10]");
    if (n < 1) throw ConfigError("nemenyi_cd: N must be >= 1");
    // critical values of the studentized range statistic divided by sqrt(2)
    static const double q05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
    static const double q10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920};
    const double* q;
    if (std::fabs(alpha - 0.05) < 1e-12) {
        q = q05;
    } else if (std::fabs(alpha - 0.10) < 1e-12) {
        q = q10;
    } else {
        throw ConfigError("nemenyi_cd: alpha must be 0.05 or 0.10");
    }
    return q[k - 2] * std::sqrt(static_cast<double>(k) * (k + 1.0) / (6.0 * n));
}

}  // namespace adbench

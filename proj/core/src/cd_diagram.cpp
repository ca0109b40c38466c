#include "adbench/cd_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "adbench/errors.hpp"

namespace adbench {

std::vector<std::vector<int>> cd_groups(const std::vector<double>& avg_ranks, double cd) {
    if (cd <= 0.0) throw ConfigError("cd_groups: cd must be > 0");
    std::size_t k = avg_ranks.size();
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (avg_ranks[a] != avg_ranks[b]) return avg_ranks[a] < avg_ranks[b];
        return a < b;
    });

    // candidate runs [i..j] over the sorted order with span <= cd, maximal
    struct Run {
        std::size_t i, j;
        double lo, hi;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i;
        while (j + 1 < k && avg_ranks[order[j + 1]] - avg_ranks[order[i]] <= cd) ++j;
        if (j == i) continue;  // singleton
        if (!runs.empty() && runs.back().j >= j) continue;  // contained in the previous run
        runs.push_back({i, j, avg_ranks[order[i]], avg_ranks[order[j]]});
    }

    // drop runs whose rank interval is covered by the union of the others
    auto covered_by_others = [&](std::size_t self) {
        // merge the other intervals, then check [lo, hi] is inside one merged piece
        std::vector<std::pair<double, double>> ivals;
        for (std::size_t t = 0; t < runs.size(); ++t)
            if (t != self) ivals.emplace_back(runs[t].lo, runs[t].hi);
        std::sort(ivals.begin(), ivals.end());
        std::vector<std::pair<double, double>> merged;
        for (const auto& iv : ivals) {
            if (!merged.empty() && iv.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, iv.second);
            else
                merged.push_back(iv);
        }
        for (const auto& iv : merged)
            if (iv.first <= runs[self].lo && runs[self].hi <= iv.second) return true;
        return false;
    };

    bool removed = true;
    while (removed && runs.size() > 1) {
        removed = false;
        // prefer dropping the shortest redundant span, deterministically
        std::size_t victim = runs.size();
        double victim_span = 0.0;
        for (std::size_t t = 0; t < runs.size(); ++t) {
            if (!covered_by_others(t)) continue;
            double span = runs[t].hi - runs[t].lo;
            if (victim == runs.size() || span < victim_span) {
                victim = t;
                victim_span = span;
            }
        }
        if (victim < runs.size()) {
            runs.erase(runs.begin() + victim);
            removed = true;
        }
    }

    std::vector<std::vector<int>> groups;
    for (const Run& run : runs) {
        std::vector<int> g;
        for (std::size_t t = run.i; t <= run.j; ++t) g.push_back(order[t]);
        groups.push_back(std::move(g));
    }
    return groups;
}

CdLayout layout_cd(const RankTable& rt, double cd) {
    if (rt.k < 2) throw ConfigError("cd diagram: need at least 2 algorithms");
    CdLayout layout;
    layout.order.resize(rt.k);
    std::iota(layout.order.begin(), layout.order.end(), 0);
    std::sort(layout.order.begin(), layout.order.end(), [&](int a, int b) {
        if (rt.avg_ranks[a] != rt.avg_ranks[b]) return rt.avg_ranks[a] < rt.avg_ranks[b];
        return a < b;
    });

    double lo = rt.avg_ranks[layout.order.front()];
    double hi = rt.avg_ranks[layout.order.back()];
    layout.axis_lo = std::floor(lo);
    layout.axis_hi = std::ceil(hi);
    if (layout.axis_hi <= layout.axis_lo) layout.axis_hi = layout.axis_lo + 1.0;

    for (const auto& members : cd_groups(rt.avg_ranks, cd)) {
        CdBar bar;
        bar.members = members;
        bar.lo_rank = rt.avg_ranks[members.front()];
        bar.hi_rank = rt.avg_ranks[members.back()];
        layout.bars.push_back(std::move(bar));
    }
    // stagger overlapping bars onto separate levels (bars arrive sorted by lo)
    std::vector<double> level_end;
    for (auto& bar : layout.bars) {
        std::size_t lvl = 0;
        while (lvl < level_end.size() && bar.lo_rank < level_end[lvl] + 1e-12) ++lvl;
        if (lvl == level_end.size()) level_end.push_back(0.0);
        level_end[lvl] = bar.hi_rank;
        bar.level = static_cast<int>(lvl);
    }
    return layout;
}

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_cd_svg(const RankTable& rt, double cd, const std::string& annotation) {
    CdLayout layout = layout_cd(rt, cd);

    const double margin = 150.0;
    const double axis_width = 420.0;
    const double width = axis_width + 2.0 * margin;
    int left_count = (rt.k + 1) / 2;
    int right_count = rt.k - left_count;
    int max_side = std::max(left_count, right_count);
    int max_level = 0;
    for (const auto& bar : layout.bars) max_level = std::max(max_level, bar.level);

    const double label_row = 22.0;
    const double bar_row = 9.0;
    const double axis_y = 30.0 + max_side * label_row + (max_level + 1) * bar_row + 12.0;
    const double height = axis_y + 40.0;

    auto x_of = [&](double rank) {
        return margin +
               (rank - layout.axis_lo) / (layout.axis_hi - layout.axis_lo) * axis_width;
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (!annotation.empty()) svg += "<!-- " + xml_escape(annotation) + " -->\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt2(width) +
           "\" height=\"" + fmt2(height) + "\" font-family=\"sans-serif\" font-size=\"13\">\n";

    // axis with integer ticks
    svg += "<line class=\"axis\" x1=\"" + fmt2(x_of(layout.axis_lo)) + "\" y1=\"" + fmt2(axis_y) +
           "\" x2=\"" + fmt2(x_of(layout.axis_hi)) + "\" y2=\"" + fmt2(axis_y) +
           "\" stroke=\"black\"/>\n";
    for (double t = layout.axis_lo; t <= layout.axis_hi + 1e-9; t += 1.0) {
        double x = x_of(t);
        svg += "<line x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(axis_y - 4.0) + "\" x2=\"" + fmt2(x) +
               "\" y2=\"" + fmt2(axis_y + 4.0) + "\" stroke=\"black\"/>\n";
        svg += "<text class=\"tick-label\" x=\"" + fmt2(x) + "\" y=\"" + fmt2(axis_y + 18.0) +
               "\" text-anchor=\"middle\">" + fmt2(t) + "</text>\n";
    }

    // algorithm stems and labels: best half on the left, rest on the right
    for (int pos = 0; pos < rt.k; ++pos) {
        int idx = layout.order[pos];
        double x = x_of(rt.avg_ranks[idx]);
        bool left = pos < left_count;
        int row = left ? pos : rt.k - 1 - pos;
        double label_y = 20.0 + (max_side - 1 - row) * label_row;
        double label_x = left ? margin - 12.0 : margin + axis_width + 12.0;
        svg += "<polyline fill=\"none\" stroke=\"black\" points=\"" + fmt2(x) + "," +
               fmt2(axis_y) + " " + fmt2(x) + "," + fmt2(label_y) + " " + fmt2(label_x) + "," +
               fmt2(label_y) + "\"/>\n";
        svg += "<text class=\"algo-label\" x=\"" + fmt2(label_x + (left ? -4.0 : 4.0)) +
               "\" y=\"" + fmt2(label_y + 4.0) + "\" text-anchor=\"" +
               (left ? "end" : "start") + "\">" + xml_escape(rt.algorithms[idx]) + " (" +
               fmt2(rt.avg_ranks[idx]) + ")</text>\n";
    }

    // group bars just above the axis, staggered by level
    for (const auto& bar : layout.bars) {
        double y = axis_y - 8.0 - bar.level * bar_row;
        svg += "<line class=\"group-bar\" x1=\"" + fmt2(x_of(bar.lo_rank) - 3.0) + "\" y1=\"" +
               fmt2(y) + "\" x2=\"" + fmt2(x_of(bar.hi_rank) + 3.0) + "\" y2=\"" + fmt2(y) +
               "\" stroke=\"black\" stroke-width=\"5\"/>\n";
    }

    svg += "<text x=\"" + fmt2(margin) + "\" y=\"" + fmt2(height - 8.0) +
           "\" font-size=\"11\">CD = " + fmt2(cd) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

void render_cd_diagram(const RankTable& rt, double cd, const std::filesystem::path& path,
                       const std::string& annotation) {
    std::string svg = render_cd_svg(rt, cd, annotation);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << svg;
    if (!out) throw IoError("short write to " + path.string());
}

}  // namespace adbench

#include "adbench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "adbench/errors.hpp"

namespace adbench {

ScoreTable build_score_table(const SelectionResult& selection,
                             const std::vector<Algorithm>& algorithms) {
    std::set<std::string> dataset_set;
    std::map<std::pair<std::string, Algorithm>, double> values;
    for (const auto& cell : selection.cells) {
        dataset_set.insert(cell.dataset);
        values[{cell.dataset, cell.algorithm}] = cell.mean_test_auc;
    }

    std::vector<std::string> datasets(dataset_set.begin(), dataset_set.end());
    std::vector<std::string> missing;
    for (const auto& ds : datasets)
        for (Algorithm a : algorithms)
            if (!values.count({ds, a})) missing.push_back(ds + "/" + to_string(a));
    if (!missing.empty()) {
        std::string msg = "incomplete store, missing cells:";
        for (const auto& m : missing) msg += " " + m;
        throw ConfigError(msg);
    }

    ScoreTable table;
    table.datasets = datasets;
    for (Algorithm a : algorithms) table.algorithms.push_back(display_name(a));
    table.scores = Matrix(datasets.size(), algorithms.size());
    for (std::size_t i = 0; i < datasets.size(); ++i)
        for (std::size_t j = 0; j < algorithms.size(); ++j)
            table.scores(i, j) = values[{datasets[i], algorithms[j]}];
    return table;
}

namespace {

std::string cell(double score, double rank, bool avg_row) {
    char buf[48];
    if (avg_row)
        std::snprintf(buf, sizeof buf, "%.2f(%.2f)", score, rank);
    else
        std::snprintf(buf, sizeof buf, "%.2f(%.1f)", score, rank);
    return buf;
}

void open_out(std::ofstream& out, const std::filesystem::path& path,
              const std::string& annotation) {
    out.open(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    if (!annotation.empty()) out << "# " << annotation << '\n';
}

}  // namespace

void write_rank_table_csv(const ScoreTable& table, const RankTable& rt,
                          const std::filesystem::path& path, const std::string& annotation) {
    std::ofstream out;
    open_out(out, path, annotation);
    out << "dataset";
    for (const auto& a : table.algorithms) out << ',' << a;
    out << '\n';

    std::vector<double> mean_scores(table.algorithms.size(), 0.0);
    for (std::size_t i = 0; i < table.datasets.size(); ++i) {
        out << table.datasets[i];
        for (std::size_t j = 0; j < table.algorithms.size(); ++j) {
            out << ',' << cell(table.scores(i, j), rt.row_ranks(i, j), false);
            mean_scores[j] += table.scores(i, j);
        }
        out << '\n';
    }
    out << "avg";
    for (std::size_t j = 0; j < table.algorithms.size(); ++j) {
        mean_scores[j] /= static_cast<double>(table.datasets.size());
        out << ',' << cell(mean_scores[j], rt.avg_ranks[j], true);
    }
    out << '\n';
    if (!out) throw IoError("short write to " + path.string());
}

ScoreTable read_rank_table_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    // skip comment lines
    do {
        if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    } while (!line.empty() && line[0] == '#');

    ScoreTable table;
    {
        std::stringstream ss(line);
        std::string tok;
        bool first = true;
        while (std::getline(ss, tok, ',')) {
            if (first) {
                first = false;
            } else {
                table.algorithms.push_back(tok);
            }
        }
    }
    if (table.algorithms.empty()) throw ParseError(path.string() + ": no algorithm columns");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        if (tok == "avg") continue;
        std::string name = tok;
        std::vector<double> scores;
        while (std::getline(ss, tok, ',')) {
            // cells look like 0.93(3.5); the score is the part before '('
            std::size_t paren = tok.find('(');
            std::string num = paren == std::string::npos ? tok : tok.substr(0, paren);
            scores.push_back(std::strtod(num.c_str(), nullptr));
        }
        if (scores.size() != table.algorithms.size())
            throw ParseError(path.string() + ": row '" + name + "' has wrong cell count");
        table.datasets.push_back(name);
        rows.push_back(std::move(scores));
    }
    table.scores = Matrix(rows.size(), table.algorithms.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) table.scores(i, j) = rows[i][j];
    return table;
}

void write_summary_csv(const std::vector<std::pair<Criterion, RankTable>>& rows,
                       const std::filesystem::path& path, const std::string& annotation) {
    if (rows.empty()) throw ConfigError("write_summary_csv: no rows");
    std::ofstream out;
    open_out(out, path, annotation);
    out << "criterion";
    for (const auto& a : rows.front().second.algorithms) out << ',' << a;
    out << '\n';
    char buf[32];
    for (const auto& [criterion, rt] : rows) {
        out << display_name(criterion);
        for (double r : rt.avg_ranks) {
            std::snprintf(buf, sizeof buf, "%.2f", r);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("short write to " + path.string());
}

void write_timing_csv(const std::map<Algorithm, TimingRow>& rows,
                      const std::filesystem::path& path, const std::string& annotation) {
    std::ofstream out;
    open_out(out, path, annotation);
    out << "metric";
    for (const auto& [algo, row] : rows) out << ',' << display_name(algo);
    out << '\n';
    char buf[32];
    out << "t_f_seconds";
    for (const auto& [algo, row] : rows) {
        std::snprintf(buf, sizeof buf, "%.4g", row.mean_fit_seconds);
        out << ',' << buf;
    }
    out << "\nt_p_seconds";
    for (const auto& [algo, row] : rows) {
        std::snprintf(buf, sizeof buf, "%.4g", row.mean_predict_seconds);
        out << ',' << buf;
    }
    out << '\n';
    if (!out) throw IoError("short write to " + path.string());
}

void write_friedman_csv(const std::vector<FriedmanRow>& rows, const std::filesystem::path& path,
                        const std::string& annotation) {
    std::ofstream out;
    open_out(out, path, annotation);
    out << "criterion,statistic,dof,p_value,reject_at_0.05,cd_0.05\n";
    char buf[128];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.6g,%d,%.6g,%s,%.4f\n",
                      to_string(row.criterion).c_str(), row.result.statistic, row.result.dof,
                      row.result.p_value, row.result.p_value < 0.05 ? "yes" : "no", row.cd05);
        out << buf;
    }
    if (!out) throw IoError("short write to " + path.string());
}

}  // namespace adbench

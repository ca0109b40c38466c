#include "adbench/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "adbench/errors.hpp"
#include "adbench/rng.hpp"

namespace adbench {

std::string to_string(Difficulty d) {
    switch (d) {
        case Difficulty::Easy: return "easy";
        case Difficulty::Medium: return "medium";
        case Difficulty::Hard: return "hard";
        case Difficulty::VeryHard: return "very_hard";
        case Difficulty::Untagged: return "";
    }
    return "";
}

Difficulty difficulty_from_string(const std::string& s) {
    if (s.empty()) return Difficulty::Untagged;
    if (s == "easy") return Difficulty::Easy;
    if (s == "medium") return Difficulty::Medium;
    if (s == "hard") return Difficulty::Hard;
    if (s == "very_hard") return Difficulty::VeryHard;
    throw ParseError("unknown difficulty tag '" + s + "'");
}

std::size_t RawDataset::normal_count() const {
    std::size_t n = 0;
    for (int l : labels) n += (l == 0);
    return n;
}

std::size_t RawDataset::anomaly_count() const { return labels.size() - normal_count(); }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_number(const std::string& s, const std::string& where) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ParseError(where + ": not a number: '" + s + "'");
    if (!std::isfinite(v)) throw ParseError(where + ": non-finite feature value '" + s + "'");
    return v;
}

}  // namespace

RawDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ":1: empty file");
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[header.size() - 2] != "label" ||
        header.back() != "difficulty")
        throw ParseError(path.string() + ":1: header must be f1,...,fd,label,difficulty");
    std::size_t d = header.size() - 2;

    std::vector<double> values;
    std::vector<int> labels;
    std::vector<Difficulty> difficulty;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::string where = path.string() + ":" + std::to_string(lineno);
        auto fields = split_csv_line(line);
        if (fields.size() != d + 2)
            throw ParseError(where + ": expected " + std::to_string(d + 2) + " fields, got " +
                             std::to_string(fields.size()));
        for (std::size_t j = 0; j < d; ++j) values.push_back(parse_number(fields[j], where));
        const std::string& lab = fields[d];
        int label;
        if (lab == "0") {
            label = 0;
        } else if (lab == "1") {
            label = 1;
        } else {
            throw ParseError(where + ": label must be 0 or 1, got '" + lab + "'");
        }
        labels.push_back(label);
        Difficulty diff;
        try {
            diff = difficulty_from_string(fields[d + 1]);
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (label == 0 && diff != Difficulty::Untagged)
            throw ParseError(where + ": difficulty tag on a normal row");
        difficulty.push_back(diff);
    }

    RawDataset ds;
    ds.name = path.stem().string();
    ds.labels = std::move(labels);
    ds.difficulty = std::move(difficulty);
    ds.features = Matrix(ds.labels.size(), d);
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = values[i * d + j];

    if (ds.normal_count() == 0)
        throw ParseError(path.string() + ": dataset has no normal rows");
    return ds;
}

void save_dataset(const RawDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset file " + path.string());
    for (std::size_t j = 0; j < ds.dim(); ++j) out << 'f' << (j + 1) << ',';
    out << "label,difficulty\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) out << format_double(ds.features(i, j)) << ',';
        out << ds.labels[i] << ',' << to_string(ds.difficulty[i]) << '\n';
    }
    if (!out) throw IoError("short write to " + path.string());
}

std::pair<RawDataset, Standardization> standardize(const RawDataset& ds) {
    if (ds.dim() == 0) throw ConfigError("standardize: dataset has no features");
    std::size_t d = ds.dim();
    Standardization st;
    st.mean.assign(d, 0.0);
    st.std.assign(d, 0.0);

    std::size_t n_norm = ds.normal_count();
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (ds.labels[i] == 0) sum += ds.features(i, j);
        st.mean[j] = sum / static_cast<double>(n_norm);
        double ss = 0.0;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (ds.labels[i] != 0) continue;
            double c = ds.features(i, j) - st.mean[j];
            ss += c * c;
        }
        st.std[j] = std::sqrt(ss / static_cast<double>(n_norm));
    }

    RawDataset out = ds;
    for (std::size_t j = 0; j < d; ++j) {
        double scale = st.std[j] > 0.0 ? 1.0 / st.std[j] : 1.0;
        for (std::size_t i = 0; i < ds.size(); ++i)
            out.features(i, j) = (ds.features(i, j) - st.mean[j]) * scale;
    }
    return {std::move(out), std::move(st)};
}

RawDataset synth_dataset(int n_normal, int n_anomaly, int d, double shift, std::uint64_t seed,
                         const std::string& name) {
    if (n_normal < 1 || n_anomaly < 0 || d < 1)
        throw ConfigError("synth_dataset: sizes must be positive");
    RawDataset ds;
    ds.name = name;
    std::size_t n = static_cast<std::size_t>(n_normal + n_anomaly);
    ds.features = Matrix(n, static_cast<std::size_t>(d));
    ds.labels.resize(n);
    ds.difficulty.resize(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        bool anomaly = i >= static_cast<std::size_t>(n_normal);
        ds.labels[i] = anomaly ? 1 : 0;
        ds.difficulty[i] = anomaly ? Difficulty::Easy : Difficulty::Untagged;
        double offset = anomaly ? shift : 0.0;
        for (int j = 0; j < d; ++j)
            ds.features(i, static_cast<std::size_t>(j)) = offset + rng.normal();
    }
    return ds;
}

}  // namespace adbench

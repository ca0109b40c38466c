#include "adbench/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adbench/errors.hpp"
#include "adbench/rng.hpp"

namespace adbench {

using nlohmann::json;

std::string DifficultyFilter::str() const {
    if (allowed.empty()) return "any";
    std::string out;
    for (Difficulty d : allowed) {
        if (!out.empty()) out += ",";
        out += d == Difficulty::Untagged ? "untagged" : to_string(d);
    }
    return out;
}

DifficultyFilter DifficultyFilter::parse(const std::string& s) {
    DifficultyFilter f;
    if (s.empty() || s == "any") return f;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        f.allowed.insert(tok == "untagged" ? Difficulty::Untagged : difficulty_from_string(tok));
    }
    return f;
}

std::string BenchmarkInstance::id() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "/r%02d", resample_index);
    return source_name + buf;
}

std::size_t BenchmarkInstance::test_anomaly_count() const {
    std::size_t n = 0;
    for (int l : test_labels) n += (l == 1);
    return n;
}

std::size_t anomalies_for_rate(std::size_t base, double rate) {
    if (rate <= 0.0) return 0;
    if (rate >= 1.0) throw ConfigError("anomaly rate must be < 1");
    double want = rate / (1.0 - rate) * static_cast<double>(base);
    auto count = static_cast<std::size_t>(std::floor(want + 0.5));
    return count == 0 ? 1 : count;
}

namespace {

std::vector<std::size_t> pick_clustered(const Matrix& features,
                                        const std::vector<std::size_t>& pool, std::size_t count,
                                        Rng& rng) {
    // one seed anomaly, then its nearest anomalous neighbours
    std::size_t seed_pos = rng.below(pool.size());
    auto seed_row = features.row(pool[seed_pos]);
    std::vector<std::pair<double, std::size_t>> by_dist;
    by_dist.reserve(pool.size());
    for (std::size_t idx : pool)
        by_dist.emplace_back(squared_distance(seed_row, features.row(idx)), idx);
    std::sort(by_dist.begin(), by_dist.end());
    std::vector<std::size_t> picked;
    picked.reserve(count);
    for (std::size_t i = 0; i < count; ++i) picked.push_back(by_dist[i].second);
    return picked;
}

}  // namespace

BenchmarkInstance sample_benchmark(const RawDataset& raw, const DifficultyFilter& filter,
                                   double contamination, bool clustered, int resample_index,
                                   std::uint64_t seed) {
    if (contamination < 0.0 || contamination >= 1.0)
        throw ConfigError("sample_benchmark: contamination must be in [0, 1)");
    if (resample_index < 1) throw ConfigError("sample_benchmark: resample index must be >= 1");

    std::vector<std::size_t> normals, anomalies;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw.labels[i] == 0) {
            normals.push_back(i);
        } else if (filter.allows(raw.difficulty[i])) {
            anomalies.push_back(i);
        }
    }
    if (normals.size() < 2) throw ConfigError("sample_benchmark: need at least 2 normal rows");

    // deterministic in (seed, resample_index, dataset name)
    Rng rng(fnv1a64(raw.name + "#" + std::to_string(resample_index), seed));

    rng.shuffle(normals);
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(0.8 * static_cast<double>(normals.size()) + 0.5));
    if (n_train == 0) n_train = 1;
    if (n_train == normals.size()) n_train = normals.size() - 1;
    std::vector<std::size_t> train_idx(normals.begin(), normals.begin() + n_train);
    std::vector<std::size_t> test_norm_idx(normals.begin() + n_train, normals.end());

    std::size_t n_anom = anomalies_for_rate(test_norm_idx.size(), contamination);
    if (n_anom > anomalies.size())
        throw ConfigError("sample_benchmark: unsamplable: need " + std::to_string(n_anom) +
                          " anomalies matching filter '" + filter.str() + "' but only " +
                          std::to_string(anomalies.size()) + " available in " + raw.name);

    std::vector<std::size_t> anom_idx;
    if (n_anom > 0) {
        if (clustered) {
            anom_idx = pick_clustered(raw.features, anomalies, n_anom, rng);
        } else {
            rng.shuffle(anomalies);
            anom_idx.assign(anomalies.begin(), anomalies.begin() + n_anom);
        }
    }

    BenchmarkInstance inst;
    inst.source_name = raw.name;
    inst.resample_index = resample_index;
    inst.contamination = contamination;
    inst.filter = filter;
    inst.clustered = clustered;
    inst.seed = seed;

    inst.train = take_rows(raw.features, train_idx);

    std::vector<std::size_t> test_idx = test_norm_idx;
    test_idx.insert(test_idx.end(), anom_idx.begin(), anom_idx.end());
    inst.test = take_rows(raw.features, test_idx);
    inst.test_labels.assign(test_norm_idx.size(), 0);
    inst.test_labels.insert(inst.test_labels.end(), anom_idx.size(), 1);

    std::set<std::size_t> used(anom_idx.begin(), anom_idx.end());
    std::vector<std::size_t> spare;
    for (std::size_t idx : anomalies)
        if (!used.count(idx)) spare.push_back(idx);
    std::sort(spare.begin(), spare.end());
    inst.spare_anomalies = take_rows(raw.features, spare);

    return inst;
}

TuningSet make_tuning_set(const BenchmarkInstance& instance, double injection_rate,
                          std::uint64_t seed) {
    if (injection_rate <= 0.0)
        throw ConfigError("make_tuning_set: injection rate must be > 0 (an all-normal tuning "
                          "set has no usable ranking metric)");

    std::size_t want = anomalies_for_rate(instance.train.rows(), injection_rate);

    // assemble the candidate pool: spare anomalies first, test anomalies as fallback
    Matrix test_anoms;
    {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < instance.test_labels.size(); ++i)
            if (instance.test_labels[i] == 1) idx.push_back(i);
        test_anoms = take_rows(instance.test, idx);
    }

    const Matrix* pool = &instance.spare_anomalies;
    bool reused = false;
    if (instance.spare_anomalies.rows() < want) {
        pool = &test_anoms;
        reused = true;
    }
    if (pool->rows() == 0)
        throw ConfigError("make_tuning_set: no anomalies available for injection");
    if (want > pool->rows()) want = pool->rows();

    Rng rng(fnv1a64(instance.id() + "#tuning", seed));
    std::vector<std::size_t> order(pool->rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    order.resize(want);
    std::sort(order.begin(), order.end());
    Matrix injected = take_rows(*pool, order);

    TuningSet ts;
    ts.instance_id = instance.id();
    ts.injection_rate = injection_rate;
    ts.seed = seed;
    ts.reused_test_anomalies = reused;
    ts.features = Matrix(instance.train.rows() + injected.rows(), instance.train.cols());
    for (std::size_t i = 0; i < instance.train.rows(); ++i) {
        auto dst = ts.features.row(i);
        auto src = instance.train.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    for (std::size_t i = 0; i < injected.rows(); ++i) {
        auto dst = ts.features.row(instance.train.rows() + i);
        auto src = injected.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    ts.labels.assign(instance.train.rows(), 0);
    ts.labels.insert(ts.labels.end(), injected.rows(), 1);
    return ts;
}

namespace {

void write_matrix_csv(const Matrix& m, const std::vector<int>* labels,
                      const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        if (j) out << ',';
        out << 'f' << (j + 1);
    }
    if (labels) out << ",label";
    out << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        if (labels) out << ',' << (*labels)[i];
        out << '\n';
    }
    if (!out) throw IoError("short write to " + path.string());
}

Matrix read_matrix_csv(const std::filesystem::path& path, std::vector<int>* labels) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ":1: empty file");
    std::size_t ncols = 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    bool has_label = line.find("label") != std::string::npos;
    std::size_t d = has_label ? ncols - 1 : ncols;

    std::vector<double> values;
    std::size_t rows = 0, lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::size_t col = 0;
        while (std::getline(ss, tok, ',')) {
            if (col < d) {
                values.push_back(std::strtod(tok.c_str(), nullptr));
            } else if (labels) {
                labels->push_back(std::stoi(tok));
            }
            ++col;
        }
        if (col != ncols)
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": field count");
        ++rows;
    }
    Matrix m(rows, d);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = values[i * d + j];
    return m;
}

}  // namespace

void save_instance(const BenchmarkInstance& instance, const std::filesystem::path& dir,
                   const std::string& run_digest) {
    std::filesystem::create_directories(dir);
    write_matrix_csv(instance.train, nullptr, dir / "train.csv");
    write_matrix_csv(instance.test, &instance.test_labels, dir / "test.csv");
    if (instance.spare_anomalies.rows() > 0)
        write_matrix_csv(instance.spare_anomalies, nullptr, dir / "anomalies.csv");

    json meta;
    meta["source_name"] = instance.source_name;
    meta["resample_index"] = instance.resample_index;
    meta["contamination"] = instance.contamination;
    meta["difficulty_filter"] = instance.filter.str();
    meta["clustered"] = instance.clustered;
    meta["seed"] = instance.seed;
    meta["train_rows"] = instance.train.rows();
    meta["test_rows"] = instance.test.rows();
    meta["test_anomalies"] = instance.test_anomaly_count();
    meta["spare_anomalies"] = instance.spare_anomalies.rows();
    if (!run_digest.empty()) meta["run_digest"] = run_digest;
    std::ofstream out(dir / "meta.json");
    if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
}

BenchmarkInstance load_instance(const std::filesystem::path& dir) {
    std::ifstream metain(dir / "meta.json");
    if (!metain) throw IoError("cannot open " + (dir / "meta.json").string());
    json meta = json::parse(metain);

    BenchmarkInstance inst;
    inst.source_name = meta.at("source_name").get<std::string>();
    inst.resample_index = meta.at("resample_index").get<int>();
    inst.contamination = meta.at("contamination").get<double>();
    inst.filter = DifficultyFilter::parse(meta.at("difficulty_filter").get<std::string>());
    inst.clustered = meta.at("clustered").get<bool>();
    inst.seed = meta.at("seed").get<std::uint64_t>();

    inst.train = read_matrix_csv(dir / "train.csv", nullptr);
    inst.test = read_matrix_csv(dir / "test.csv", &inst.test_labels);
    if (std::filesystem::exists(dir / "anomalies.csv"))
        inst.spare_anomalies = read_matrix_csv(dir / "anomalies.csv", nullptr);
    else
        inst.spare_anomalies = Matrix(0, inst.train.cols());
    return inst;
}

}  // namespace adbench

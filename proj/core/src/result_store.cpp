#include "adbench/result_store.hpp"

#include <cstdio>
#include <fstream>

#include "adbench/errors.hpp"
#include "json_util.hpp"

namespace adbench {

using detail::json;

std::string ExperimentKey::str() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "|r%02d|", resample);
    char cfg[32];
    std::snprintf(cfg, sizeof cfg, "|cfg%03d", config_id);
    return dataset + buf + to_string(algorithm) + cfg;
}

namespace {

json key_to_json(const ExperimentKey& k) {
    return json{{"dataset", k.dataset},
                {"resample", k.resample},
                {"algorithm", to_string(k.algorithm)},
                {"config_id", k.config_id}};
}

ExperimentKey key_from_json(const json& j) {
    ExperimentKey k;
    k.dataset = j.at("dataset").get<std::string>();
    k.resample = j.at("resample").get<int>();
    k.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    k.config_id = j.at("config_id").get<int>();
    return k;
}

}  // namespace

std::string record_to_json_line(const ExperimentRecord& rec) {
    json j;
    j["key"] = key_to_json(rec.key);
    j["config"] = detail::config_to_json(rec.config);
    j["status"] = rec.failed ? "failed" : "ok";
    if (rec.failed) {
        j["error"] = rec.error;
    } else {
        j["metrics"] = json{{"test_auc", rec.metrics->test_auc},
                            {"train_auc", rec.metrics->train_auc},
                            {"prec_top1", rec.metrics->prec_top1},
                            {"prec_top5", rec.metrics->prec_top5}};
        j["test_scores"] = rec.test_scores;
        j["tuning_scores"] = rec.tuning_scores;
    }
    return j.dump();
}

ExperimentRecord record_from_json_line(const std::string& line) {
    json j = json::parse(line);
    ExperimentRecord rec;
    rec.key = key_from_json(j.at("key"));
    rec.config = detail::config_from_json(j.at("config"));
    rec.failed = j.at("status").get<std::string>() == "failed";
    if (rec.failed) {
        rec.error = j.value("error", "");
    } else {
        ExperimentMetrics m;
        m.test_auc = j.at("metrics").at("test_auc").get<double>();
        m.train_auc = j.at("metrics").at("train_auc").get<double>();
        m.prec_top1 = j.at("metrics").at("prec_top1").get<double>();
        m.prec_top5 = j.at("metrics").at("prec_top5").get<double>();
        rec.metrics = m;
        rec.test_scores = j.at("test_scores").get<std::vector<double>>();
        rec.tuning_scores = j.at("tuning_scores").get<std::vector<double>>();
    }
    return rec;
}

ResultStore ResultStore::open(const std::filesystem::path& dir) {
    ResultStore store;
    store.dir_ = dir;
    std::filesystem::create_directories(dir);

    std::ifstream in(store.results_file());
    if (in) {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            ExperimentRecord rec;
            try {
                rec = record_from_json_line(line);
            } catch (const std::exception&) {
                break;  // torn trailing line from an interrupted run
            }
            store.records_[rec.key.str()] = std::move(rec);
        }
    }
    std::ifstream tin(store.timings_file());
    if (tin) {
        std::string line;
        while (std::getline(tin, line)) {
            if (line.empty()) continue;
            try {
                json j = json::parse(line);
                auto it = store.records_.find(j.at("key").get<std::string>());
                if (it != store.records_.end()) {
                    it->second.fit_seconds = j.at("t_f").get<double>();
                    it->second.predict_seconds = j.at("t_p").get<double>();
                }
            } catch (const std::exception&) {
                break;
            }
        }
    }
    return store;
}

bool ResultStore::contains(const ExperimentKey& key) const {
    std::lock_guard<std::mutex> lock(*mu_);
    return records_.count(key.str()) > 0;
}

void ResultStore::append(const ExperimentRecord& rec) {
    std::lock_guard<std::mutex> lock(*mu_);
    std::string key = rec.key.str();
    if (records_.count(key)) throw ConfigError("result store: duplicate key " + key);
    records_[key] = rec;

    std::ofstream out(results_file(), std::ios::app);
    if (!out) throw IoError("cannot append to " + results_file().string());
    out << record_to_json_line(rec) << '\n';
    out.flush();

    std::ofstream tout(timings_file(), std::ios::app);
    if (!tout) throw IoError("cannot append to " + timings_file().string());
    tout << json{{"key", key}, {"t_f", rec.fit_seconds}, {"t_p", rec.predict_seconds}}.dump()
         << '\n';
}

void ResultStore::finalize() {
    std::lock_guard<std::mutex> lock(*mu_);
    {
        std::ofstream out(results_file(), std::ios::trunc);
        if (!out) throw IoError("cannot rewrite " + results_file().string());
        for (const auto& [key, rec] : records_) out << record_to_json_line(rec) << '\n';
    }
    {
        std::ofstream tout(timings_file(), std::ios::trunc);
        if (!tout) throw IoError("cannot rewrite " + timings_file().string());
        for (const auto& [key, rec] : records_)
            tout << json{{"key", key}, {"t_f", rec.fit_seconds}, {"t_p", rec.predict_seconds}}
                        .dump()
                 << '\n';
    }
}

void ResultStore::export_csv(const std::filesystem::path& path) const {
    std::lock_guard<std::mutex> lock(*mu_);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "dataset,algo,resample,config_id,test_auc,train_auc,prec1,prec5,t_f,t_p\n";
    char buf[256];
    for (const auto& [key, rec] : records_) {
        if (rec.failed) continue;
        std::snprintf(buf, sizeof buf, "%s,%s,%d,%d,%.6f,%.6f,%.6f,%.6f,%.6g,%.6g\n",
                      rec.key.dataset.c_str(), to_string(rec.key.algorithm).c_str(),
                      rec.key.resample, rec.key.config_id, rec.metrics->test_auc,
                      rec.metrics->train_auc, rec.metrics->prec_top1, rec.metrics->prec_top5,
                      rec.fit_seconds, rec.predict_seconds);
        out << buf;
    }
}

}  // namespace adbench

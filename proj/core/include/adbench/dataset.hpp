#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adbench/matrix.hpp"

namespace adbench {

enum class Difficulty { Easy, Medium, Hard, VeryHard, Untagged };

std::string to_string(Difficulty d);
Difficulty difficulty_from_string(const std::string& s);

/// Labeled source data. Labels are 0 (normal) / 1 (anomaly); a difficulty tag
/// may only be present on anomaly rows.
struct RawDataset {
    std::string name;
    Matrix features;                       // [n × d]
    std::vector<int> labels;               // 0 / 1
    std::vector<Difficulty> difficulty;    // Untagged on normal rows

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
    std::size_t normal_count() const;
    std::size_t anomaly_count() const;
};

/// CSV layout: header `f1,...,fd,label,difficulty`; label 0|1; difficulty one
/// of easy|medium|hard|very_hard or empty; UTF-8, comma separated, `.` decimal
/// point. Throws ParseError with the offending line number.
RawDataset load_dataset(const std::filesystem::path& path);

/// Writes the same layout load_dataset reads. Features are printed with 17
/// significant digits so a write/load round trip is exact.
void save_dataset(const RawDataset& ds, const std::filesystem::path& path);

struct Standardization {
    std::vector<double> mean;
    std::vector<double> std;  // 0 for zero-variance columns (column passes through centered)
};

/// Centers and scales every feature column using the mean and population
/// standard deviation of the *normal* rows only; anomalies are transformed
/// with the same parameters and never leak into the statistics.
std::pair<RawDataset, Standardization> standardize(const RawDataset& ds);

/// Synthetic benchmark source: normals ~ N(0, I_d), anomalies ~ N(shift*1, I_d),
/// anomalies tagged easy. Deterministic per seed.
RawDataset synth_dataset(int n_normal, int n_anomaly, int d, double shift, std::uint64_t seed,
                         const std::string& name = "synth");

/// Formats a double with enough digits to round-trip exactly through text.
std::string format_double(double v);

}  // namespace adbench

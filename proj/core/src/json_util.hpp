#pragma once

// Internal JSON helpers shared by the .cpp files; not installed.

#include <nlohmann/json.hpp>

#include "adbench/detector.hpp"
#include "adbench/matrix.hpp"
#include "adbench/mlp.hpp"

namespace adbench::detail {

using nlohmann::json;

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const json& j);

json config_to_json(const DetectorConfig& cfg);
DetectorConfig config_from_json(const json& j);

}  // namespace adbench::detail

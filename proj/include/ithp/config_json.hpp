#pragma once

#include <json.hpp>

#include "ithp/model.hpp"

namespace ithp {

nlohmann::json config_to_json(const ITHPConfig& cfg);
ITHPConfig config_from_json(const nlohmann::json& j);

std::string to_string(DetectorKind kind);
std::string to_string(TaskKind kind);
DetectorKind detector_kind_from_string(const std::string& s);
TaskKind task_kind_from_string(const std::string& s);

}  // namespace ithp

#pragma once

#include <filesystem>

#include <json.hpp>

#include "sera/boosting.hpp"

namespace sera {

nlohmann::json model_to_json(const GbmModel& model);
GbmModel model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const GbmModel& model);
GbmModel load_model(const std::filesystem::path& path);

} // namespace sera

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "less/config.hpp"
#include "less/model.hpp"

namespace less {

inline constexpr std::string_view kModelFormat = "less-model";
inline constexpr int kModelFormatVersion = 1;

// Self-describing JSON document: format tag and version, config echo,
// resolved plan, normalization statistics and every fitted coefficient.
// Object keys are emitted in sorted order and doubles in shortest round-trip
// form, so equal models serialize to identical bytes and a reloaded model
// predicts bit-for-bit the same values.
nlohmann::json model_to_json(const LessModel& model);
LessModel model_from_json(const nlohmann::json& doc);

std::string serialize_model(const LessModel& model);
LessModel deserialize_model(std::string_view text);

void save_model(const LessModel& model, const std::filesystem::path& path);
LessModel load_model(const std::filesystem::path& path);

nlohmann::json config_to_json(const LessConfig& config);
// Fields present in `doc` override those of `base`; unknown keys are rejected.
LessConfig config_from_json(const nlohmann::json& doc, LessConfig base = {});

}  // namespace less

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "lwgnn/trainer.hpp"

namespace lwgnn {

inline constexpr const char* kReportSchema = "lwgnn.train_report/1";

nlohmann::json config_to_json(const TrainConfig& config);
// Overlays the keys present in `doc` onto `base`. Unknown keys raise PreconditionError.
TrainConfig config_from_json(const nlohmann::json& doc, TrainConfig base = {});

nlohmann::json report_to_json(const TrainReport& report, bool include_wall_clock = true);
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace lwgnn

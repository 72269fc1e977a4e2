#pragma once

#include <json.hpp>
#include <string>

#include "sct/bias_lab.hpp"
#include "sct/diagnostics.hpp"
#include "sct/evaluation.hpp"
#include "sct/inference.hpp"

namespace sct {

// All artifacts carry a top-level schema_version.
inline constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const FittedSyntheticControl& fitted, const PanelData& panel);
nlohmann::json to_json(const BalanceTable& table);
nlohmann::json to_json(const PlaceboStudy& study, const PanelData& panel);
nlohmann::json to_json(const EvaluationReport& report, const std::string& dataset);
nlohmann::json to_json(const ExampleReport& report);

// Tidy plot-ready CSV: unit,time,series,value rows for the treated path and
// the counterfactual.
std::string paths_csv(const FittedSyntheticControl& fitted, const PanelData& panel);
// One row per fit (treated + placebos): unit,pre_rmspe,post_rmspe,ratio.
std::string ratios_csv(const PlaceboStudy& study);

}  // namespace sct

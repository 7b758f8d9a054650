#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cloudvision/eval.hpp"
#include "cloudvision/solver.hpp"

namespace cloudvision {

/// {"n_queries", "n_converged", "median_trans_m", "median_rot_deg",
///  "recall": [{"t_trans_m", "t_rot_deg", "recall_pct"}], "curve": [...]}.
/// Infinite medians are written as null.
nlohmann::json report_to_json(const EvalReport& report);

/// "t_trans_m,t_rot_deg,recall_pct" header plus one row per curve point.
std::string curve_csv(const EvalReport& report);

/// Recall vs. translation threshold, one polyline per rotation threshold.
std::string curve_svg(const EvalReport& report, const std::string& title = "recall");

/// Writes <stem>.json, <stem>.csv and <stem>.svg next to each other.
void write_report_files(const EvalReport& report, const std::filesystem::path& stem);

/// One diagnostics record (single line, no trailing newline). `error` is set
/// when localization failed before producing a result.
std::string diagnostics_line(const std::string& query, const LocalizationResult* result,
                             const std::optional<std::string>& error = std::nullopt);

/// Side-by-side ablation summary.
nlohmann::json ablation_to_json(std::span<const AblationResult> results);

/// Writes `text` to `path` in binary mode; throws Io.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace cloudvision

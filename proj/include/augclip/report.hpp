#pragma once

// Report serialization.
//
// Structured: JSON, lossless (doubles are written in shortest round-trip
// form), read back by read_report / read_ablation.
// Tabular: tab-separated, one row per (case, metric) with one column per edit
// tag; failed scores appear as "ERR:<code>", absent tags as "".

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

#include "augclip/harness.hpp"

namespace augclip {

enum class ReportFormat { structured, tabular };

std::string_view to_string(ReportFormat f) noexcept;
std::optional<ReportFormat> parse_report_format(std::string_view s) noexcept;

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json report_to_json(const ScoreReport& report);
// Throws SchemaError.
ScoreReport report_from_json(const nlohmann::json& j);

std::string render_tabular(const ScoreReport& report);

// Throws IoError when the file cannot be written (e.g. missing directory).
void write_report(const ScoreReport& report, const std::filesystem::path& path,
                  ReportFormat format);
ScoreReport read_report(const std::filesystem::path& path);

nlohmann::json ablation_to_json(std::span<const AblationCell> cells);
std::vector<AblationCell> ablation_from_json(const nlohmann::json& j);
// Tabular form concatenates each cell's rows with a leading "cell" column.
void write_ablation(std::span<const AblationCell> cells, const std::filesystem::path& path,
                    ReportFormat format);
std::vector<AblationCell> read_ablation(const std::filesystem::path& path);

// Human-readable aggregate table: metric, s_align, acc_both, case counts.
std::string format_aggregate_table(const ScoreReport& report);
// One row per cell: misclassification mean, then s_align / acc_both per
// metric.
std::string format_ablation_table(std::span<const AblationCell> cells);

}  // namespace augclip

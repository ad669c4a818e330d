#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "embedgeom/metrics.hpp"
#include "embedgeom/sweep.hpp"

namespace embedgeom {

/// Writes to a sibling temp file and renames it into place, so readers never
/// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// RFC 4180 quoting when the field contains a comma, quote, or newline.
std::string csv_field(std::string_view value);
std::vector<std::string> parse_csv_line(std::string_view line);

/// "# key: value" lines prepended to every CSV output.
std::string csv_preamble(const nlohmann::ordered_json& provenance);

/// Metric columns in display order: by cutoff, recall before nDCG.
std::vector<std::string> ordered_metric_names(const MetricReport& report);

/// unit id, rank (when known), then one column per metric.
std::string report_csv(const MetricReport& report, std::string_view unit_column,
                       const nlohmann::ordered_json& provenance);
/// Inverse of report_csv; every column other than the first and "rank" is a metric.
MetricReport parse_report_csv(std::string_view text, std::string label);

nlohmann::ordered_json report_json(const MetricReport& report);
nlohmann::ordered_json significance_json(const SignificanceResult& result);

/// k,metric,epsilon_mark rows; epsilon_mark lists every eps whose d(eps) is k.
std::string sweep_csv(const SweepCurve& curve, const nlohmann::ordered_json& provenance);
nlohmann::ordered_json sweep_json(const SweepCurve& curve);

}  // namespace embedgeom

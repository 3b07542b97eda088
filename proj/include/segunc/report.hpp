#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "segunc/evaluate.hpp"
#include "segunc/stats.hpp"

namespace segunc {

using ordered_json = nlohmann::ordered_json;

ordered_json params_json(const EvaluationParams& params);

ordered_json geometry_json(const CaseGeometry& geo);

ordered_json metrics_json(const std::vector<MetricStatus>& metrics);

ordered_json band_table_json(const std::vector<BandTableRow>& table);

// Single-map `compute` report.
ordered_json compute_report_json(const std::string& case_id,
                                 const std::vector<MetricStatus>& metrics,
                                 const CaseGeometry& geo, const EvaluationParams& params,
                                 const std::vector<BandTableRow>& band_table);

// Full `compare` report: per-case values plus the comparison table.
ordered_json comparison_report_json(const ComparisonReport& report,
                                    const std::vector<CaseReport>& cases,
                                    const std::string& clean_key, const std::string& noisy_key,
                                    const EvaluationParams& params);

// Comparison table as CSV, one row per metric, fixed 9-significant-digit
// numeric formatting.
std::string comparison_csv(const ComparisonReport& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace segunc

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tse/analysis.hpp"
#include "tse/registry.hpp"

namespace tse {

// Written as "# key: value" lines at the top of every CSV.
using ReportMetadata = std::vector<std::pair<std::string, std::string>>;

// Default header: tool version, CI method, accuracy averaging convention.
ReportMetadata default_report_metadata();

// model_id, family, version, parameter_count, suite, n, k_correct, accuracy,
// ci_low, ci_high, p_above, p_below, significance (above | below | none).
std::string render_matrix_csv(const ResultsMatrix& results, const std::vector<ModelInfo>& registry,
                              const ReportMetadata& meta);

// Table-shaped: suite, one column per family, Average.
std::string render_slopes_csv(const SlopeTable& table, const ReportMetadata& meta);

// Trend points and consecutive-level deltas.
std::string render_complexity_csv(const std::vector<TrendPoint>& trends, const std::vector<DeltaSummary>& steps,
                                  const ReportMetadata& meta);

std::string render_language_csv(const std::vector<LanguageSummary>& summary, const ReportMetadata& meta);

}  // namespace tse

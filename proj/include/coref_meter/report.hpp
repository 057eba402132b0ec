#pragma once

#include "coref_meter/consistency.hpp"
#include "coref_meter/coref_metrics.hpp"
#include "coref_meter/disagg_eval.hpp"
#include "coref_meter/pcr_bench.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace corefmeter {

inline constexpr const char* kToolName = "coref-meter";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportVersion = 1;

using Json = nlohmann::json;

Json to_json(const MetricScore& s);
Json to_json(const CorefReport& r);
Json to_json(const DocumentScore& d);
Json to_json(const TypedScore& s);
Json to_json(const DisaggReport& r);
Json to_json(const GapReport& g);
Json to_json(const PermutationResult& p);
Json to_json(const Accuracy& a);
Json to_json(const AccuracyReport& r);
Json to_json(const AssumptionCheck& c);
Json to_json(const ConsistencyMetrics& m);
Json to_json(const ConsistencyReport& r);
Json to_json(const Diagnostics& d);

MetricScore metric_score_from_json(const Json& j);
CorefReport coref_report_from_json(const Json& j);
DisaggReport disagg_report_from_json(const Json& j);

/// Hex FNV-1a of the canonical dump of `config`.
std::string config_hash(const Json& config);

/// The versioned envelope shared by every report.
Json make_report(const std::string& command, const Json& config, Json result, const Diagnostics& diag);

/// Markdown rendering of a report produced by make_report. Pure function of
/// the JSON.
std::string render_markdown(const Json& report);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Finite numbers as JSON numbers, nullopt as null.
Json optional_number(const std::optional<double>& v);

}  // namespace corefmeter

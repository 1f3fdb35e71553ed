#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ovtk/data_model.hpp"
#include "ovtk/stats.hpp"
#include "ovtk/teta.hpp"

namespace ovtk::cli {

using nlohmann::json;

inline constexpr const char* kTetaSchema = "ovtk.teta/1";
inline constexpr const char* kStatsSchema = "ovtk.stats/1";

json teta_report_json(const TetaReport& report);

/// One row per split; the four metrics in TETA, LocA, AssA, ClsA order.
struct MetricRow {
    std::string split;
    std::array<double, 4> values{};
};

/// Extracts the All/Base/Novel rows from a TETA report document. Throws
/// ParseError on anything else.
std::vector<MetricRow> teta_rows(const json& report);

/// `split,TETA,LocA,AssA,ClsA` with values at `decimals` places.
std::string teta_csv(const std::vector<MetricRow>& rows, int decimals = 1);
std::string teta_table(const std::vector<MetricRow>& rows);

json stats_report_json(const SummaryStats& summary, const AttributeReport& attributes,
                       const std::optional<SplitCounts>& splits);

/// Long-form `group,class,count,proportion` table of the size, shape and
/// length histograms plus the attribute track counts.
std::string histogram_csv(const json& stats);

/// Three side-by-side bar charts (size, shape, length proportions).
std::string histogram_svg(const json& stats);

std::string stats_table(const json& stats);

}  // namespace ovtk::cli

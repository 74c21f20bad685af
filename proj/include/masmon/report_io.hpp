#pragma once

#include <set>
#include <string>
#include <vector>

#include "masmon/campaign.hpp"
#include "masmon/contribution.hpp"

namespace masmon {

// DetectionReport <-> JSON with fields flagged, deviations, method, epsilon.
std::string detection_report_to_json(const DetectionReport& report);
DetectionReport detection_report_from_json(const std::string& text);

// Full analyze output: detection report plus provenance and the suggested
// repair (suppressed senders).
std::string analyze_report_json(const DetectionReport& report,
                                const std::set<AgentId>& suppressed_senders,
                                const std::string& resolved_config_json);

// Aggregation of campaign CSVs for the `report` command: one row per
// (topology, method), one column per attack kind.
struct AggregateTable {
    std::vector<std::string> attack_kinds;           // column order
    std::vector<std::string> row_keys;               // "topology/method"
    std::vector<std::vector<double>> monitor_cells;  // -1 when undefined
    std::vector<std::vector<double>> answer_cells;

    std::string to_csv() const;
    std::string to_text() const;
};

// Parses one or more campaign CSV files. Throws kInputUnreadable.
AggregateTable aggregate_campaign_csvs(const std::vector<std::string>& paths);

}  // namespace masmon

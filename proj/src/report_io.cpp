#include "masmon/report_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "masmon/version.hpp"

namespace masmon {

using nlohmann::json;

std::string detection_report_to_json(const DetectionReport& report) {
    json j;
    j["flagged"] = std::vector<AgentId>(report.flagged.begin(), report.flagged.end());
    json dev = json::object();
    for (const auto& [agent, value] : report.deviation) dev[std::to_string(agent)] = value;
    j["deviations"] = dev;
    j["method"] = detection_method_name(report.method);
    j["epsilon"] = report.epsilon;
    return j.dump(2);
}

DetectionReport detection_report_from_json(const std::string& text) {
    DetectionReport report;
    json j;
    try {
        j = json::parse(text);
        for (AgentId a : j.at("flagged").get<std::vector<AgentId>>()) report.flagged.insert(a);
        for (const auto& [key, value] : j.at("deviations").items())
            report.deviation[static_cast<AgentId>(std::stoul(key))] = value.get<double>();
        report.method = detection_method_from_name(j.at("method").get<std::string>());
        report.epsilon = j.at("epsilon").get<double>();
    } catch (const std::exception& e) {
        throw Error(Errc::kInputUnreadable, std::string("detection report: ") + e.what());
    }
    return report;
}

std::string analyze_report_json(const DetectionReport& report,
                                const std::set<AgentId>& suppressed_senders,
                                const std::string& resolved_config_json) {
    json j = json::parse(detection_report_to_json(report));
    j["repair_suggestion"] = {
        {"suppressed_senders",
         std::vector<AgentId>(suppressed_senders.begin(), suppressed_senders.end())}};
    j["version"] = kVersion;
    j["config"] = json::parse(resolved_config_json);
    return j.dump(2);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

struct CsvRow {
    std::string topology;
    std::string attack;
    std::string method;
    bool attacked = false;
    bool exact_hit = false;
    bool final_correct = false;
};

std::vector<CsvRow> parse_campaign_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::kInputUnreadable, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw Error(Errc::kInputUnreadable, path + ": empty file");
    const auto header = split_csv_line(line);
    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw Error(Errc::kInputUnreadable, path + ": missing column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_topology = column("topology");
    const std::size_t c_attack = column("attack");
    const std::size_t c_attacker = column("attacker");
    const std::size_t c_flagged = column("flagged");
    const std::size_t c_correct = column("final_correct");
    // Older dumps may predate the method column; default to backprop.
    std::size_t c_method = header.size();
    if (std::find(header.begin(), header.end(), "method") != header.end())
        c_method = column("method");

    std::vector<CsvRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 6)
            throw Error(Errc::kInputUnreadable,
                        path + ": line " + std::to_string(line_no) + " is malformed");
        CsvRow row;
        row.topology = fields[c_topology];
        row.attack = fields[c_attack];
        row.method = c_method < fields.size() && !fields[c_method].empty() ? fields[c_method]
                                                                           : "backprop";
        row.final_correct = fields[c_correct] == "true" || fields[c_correct] == "1";
        row.attacked = !fields[c_attacker].empty();
        row.exact_hit = row.attacked && fields[c_flagged] == fields[c_attacker];
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

AggregateTable aggregate_campaign_csvs(const std::vector<std::string>& paths) {
    if (paths.empty()) throw Error(Errc::kInputUnreadable, "no input files given");
    std::vector<CsvRow> rows;
    for (const auto& path : paths) {
        auto part = parse_campaign_csv(path);
        rows.insert(rows.end(), part.begin(), part.end());
    }

    std::set<std::string> kinds_set, keys_set;
    for (const auto& row : rows) {
        kinds_set.insert(row.attack);
        keys_set.insert(row.topology + "/" + row.method);
    }

    AggregateTable table;
    table.attack_kinds.assign(kinds_set.begin(), kinds_set.end());
    table.row_keys.assign(keys_set.begin(), keys_set.end());
    table.monitor_cells.assign(table.row_keys.size(),
                               std::vector<double>(table.attack_kinds.size(), -1.0));
    table.answer_cells = table.monitor_cells;

    for (std::size_t r = 0; r < table.row_keys.size(); ++r) {
        for (std::size_t c = 0; c < table.attack_kinds.size(); ++c) {
            int attacked = 0, hits = 0, total = 0, correct = 0;
            for (const auto& row : rows) {
                if (row.topology + "/" + row.method != table.row_keys[r]) continue;
                if (row.attack != table.attack_kinds[c]) continue;
                ++total;
                if (row.final_correct) ++correct;
                if (row.attacked) {
                    ++attacked;
                    if (row.exact_hit) ++hits;
                }
            }
            if (attacked > 0)
                table.monitor_cells[r][c] = static_cast<double>(hits) / attacked;
            if (total > 0) table.answer_cells[r][c] = static_cast<double>(correct) / total;
        }
    }
    return table;
}

namespace {

std::string format_cell(double v) {
    if (v < 0.0) return "-";
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << v;
    return s.str();
}

}  // namespace

std::string AggregateTable::to_csv() const {
    std::ostringstream out;
    out << "metric,system";
    for (const auto& kind : attack_kinds) out << ',' << kind;
    out << "\n";
    for (std::size_t r = 0; r < row_keys.size(); ++r) {
        out << "monitor_accuracy," << row_keys[r];
        for (double v : monitor_cells[r]) out << ',' << format_cell(v);
        out << "\n";
    }
    for (std::size_t r = 0; r < row_keys.size(); ++r) {
        out << "answer_accuracy," << row_keys[r];
        for (double v : answer_cells[r]) out << ',' << format_cell(v);
        out << "\n";
    }
    return out.str();
}

std::string AggregateTable::to_text() const {
    std::size_t key_width = std::string("system").size();
    for (const auto& k : row_keys) key_width = std::max(key_width, k.size());
    const int cell_width = 12;

    std::ostringstream out;
    auto header = [&](const std::string& title) {
        out << title << "\n" << std::left << std::setw(static_cast<int>(key_width) + 2) << "system";
        for (const auto& kind : attack_kinds) out << std::right << std::setw(cell_width) << kind;
        out << "\n";
    };
    header("monitor accuracy (exact flag match)");
    for (std::size_t r = 0; r < row_keys.size(); ++r) {
        out << std::left << std::setw(static_cast<int>(key_width) + 2) << row_keys[r];
        for (double v : monitor_cells[r])
            out << std::right << std::setw(cell_width) << format_cell(v);
        out << "\n";
    }
    out << "\n";
    header("answer accuracy");
    for (std::size_t r = 0; r < row_keys.size(); ++r) {
        out << std::left << std::setw(static_cast<int>(key_width) + 2) << row_keys[r];
        for (double v : answer_cells[r])
            out << std::right << std::setw(cell_width) << format_cell(v);
        out << "\n";
    }
    return out.str();
}

}  // namespace masmon

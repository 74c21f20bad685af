#include "masmon/repair.hpp"

#include <fstream>

#include <json.hpp>

namespace masmon {

using nlohmann::json;

void RepairPolicy::validate() const {
    if (base_quarantine < 1) throw Error(Errc::kConfigInvalid, "repair.base_quarantine < 1");
    if (backoff_factor < 1) throw Error(Errc::kConfigInvalid, "repair.backoff_factor < 1");
}

std::vector<PlannedSend> RepairedPlan::effective() const {
    std::vector<PlannedSend> out;
    for (const auto& send : base.sends)
        if (!suppressed_senders.count(send.sender)) out.push_back(send);
    return out;
}

RepairedPlan apply_quarantine(const CommPlan& plan, const QuarantineState& state) {
    RepairedPlan out;
    out.base = plan;
    for (const auto& [agent, remaining] : state.quarantined) {
        (void)remaining;
        out.suppressed_senders.insert(agent);
    }
    return out;
}

QuarantineState defense_step(const QuarantineState& state, const DetectionReport& report,
                             const RepairPolicy& policy) {
    policy.validate();
    QuarantineState next;
    next.strike_count = state.strike_count;

    // Active quarantines tick down first; release happens at zero.
    for (const auto& [agent, remaining] : state.quarantined)
        if (remaining - 1 > 0) next.quarantined[agent] = remaining - 1;

    for (AgentId agent : report.flagged) {
        if (next.quarantined.count(agent)) continue;  // already held, keep ticking
        int strikes = next.strike_count[agent];
        long duration = policy.base_quarantine;
        for (int s = 0; s < strikes; ++s) {
            duration *= policy.backoff_factor;
            if (duration > 1'000'000) {  // clamp; beyond this the agent is gone for good
                duration = 1'000'000;
                break;
            }
        }
        next.quarantined[agent] = static_cast<int>(duration);
        next.strike_count[agent] = strikes + 1;
    }
    return next;
}

std::string QuarantineState::to_json() const {
    json j;
    json q = json::object(), s = json::object();
    for (const auto& [agent, remaining] : quarantined) q[std::to_string(agent)] = remaining;
    for (const auto& [agent, strikes] : strike_count) s[std::to_string(agent)] = strikes;
    j["quarantined"] = q;
    j["strike_count"] = s;
    return j.dump(2);
}

QuarantineState QuarantineState::from_json(const std::string& text) {
    QuarantineState state;
    json j;
    try {
        j = json::parse(text);
        const json quarantined = j.value("quarantined", json::object());
        const json strikes = j.value("strike_count", json::object());
        for (const auto& [key, value] : quarantined.items())
            state.quarantined[static_cast<AgentId>(std::stoul(key))] = value.get<int>();
        for (const auto& [key, value] : strikes.items())
            state.strike_count[static_cast<AgentId>(std::stoul(key))] = value.get<int>();
    } catch (const std::exception& e) {
        throw Error(Errc::kStateInvalid, e.what());
    }
    for (const auto& [agent, remaining] : state.quarantined) {
        if (remaining < 1) throw Error(Errc::kStateInvalid, "remaining episodes < 1");
        if (state.strike_count[agent] < 1)
            throw Error(Errc::kStateInvalid,
                        "quarantined agent " + std::to_string(agent) + " has no strikes");
    }
    return state;
}

void QuarantineState::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::kInputUnreadable, "cannot write " + path);
    out << to_json() << "\n";
}

QuarantineState QuarantineState::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::kInputUnreadable, "cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return QuarantineState::from_json(text);
}

}  // namespace masmon

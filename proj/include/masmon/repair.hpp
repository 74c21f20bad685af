#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "masmon/contribution.hpp"
#include "masmon/types.hpp"

namespace masmon {

// One planned send: at `round`, `sender` broadcasts to `receivers`.
struct PlannedSend {
    int round = 0;
    AgentId sender = 0;
    std::vector<AgentId> receivers;
};

struct CommPlan {
    std::vector<PlannedSend> sends;
};

struct RepairedPlan {
    CommPlan base;
    std::set<AgentId> suppressed_senders;

    // Sends with suppressed senders removed.
    std::vector<PlannedSend> effective() const;
};

struct QuarantineState {
    std::map<AgentId, int> quarantined;   // agent -> remaining episodes (>= 1)
    std::map<AgentId, int> strike_count;  // persists after release

    bool is_quarantined(AgentId a) const { return quarantined.count(a) > 0; }

    std::string to_json() const;
    static QuarantineState from_json(const std::string& text);

    void save_file(const std::string& path) const;
    static QuarantineState load_file(const std::string& path);
};

struct RepairPolicy {
    int base_quarantine = 3;  // Q
    int backoff_factor = 2;   // quarantine lasts Q * backoff^strikes episodes

    void validate() const;
};

// Cuts every outbound message of a quarantined sender. Inbound delivery and
// the agent's own (now unheard) output are left alone.
RepairedPlan apply_quarantine(const CommPlan& plan, const QuarantineState& state);

// Advances the quarantine state machine by one episode: active quarantines
// tick down and release at zero; agents flagged by `report` that are not
// currently held enter for base_quarantine * backoff_factor^strikes episodes.
QuarantineState defense_step(const QuarantineState& state, const DetectionReport& report,
                             const RepairPolicy& policy);

}  // namespace masmon

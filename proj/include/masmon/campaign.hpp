#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "masmon/contribution.hpp"
#include "masmon/judge.hpp"
#include "masmon/repair.hpp"
#include "masmon/sim.hpp"

namespace masmon {

// Episode schedules cycle: episode e uses entry e % size().
struct CampaignSpec {
    int episodes = 0;
    std::uint64_t master_seed = 42;

    std::vector<TopologySpec> topology_schedule = {TopologySpec{}};
    std::vector<AttackSpec> attack_schedule = {AttackSpec{}};
    bool rotate_attacker = false;  // attacker id advances by episode index

    BehaviorParams behavior;
    JudgeConfig judge;
    DetectionConfig detection;
    DetectionMethod method = DetectionMethod::kBackprop;

    bool repair_enabled = false;  // quarantine carried across episodes
    RepairPolicy repair;
    bool count_quarantined_votes = false;

    bool dump_transcripts = false;
    bool no_carryover = false;  // allows parallel episode execution

    void validate() const;

    std::string to_json() const;                       // resolved config echo
    static CampaignSpec from_json(const std::string&); // throws kConfigInvalid
    static CampaignSpec load_file(const std::string& path);
};

struct EpisodeRecord {
    int episode = 0;
    TopologyKind topology = TopologyKind::kFlat;
    AttackKind attack = AttackKind::kNone;
    std::optional<AgentId> attacker;
    DetectionReport detection;
    bool final_correct = false;
    std::string final_decision;
    std::uint64_t judge_seed = 0;
    std::vector<AgentId> quarantined_before;  // senders muted during the episode
};

struct Metrics {
    // Exact-match detection rate over attacked episodes: flagged == {attacker}.
    std::optional<double> monitor_accuracy;
    // Lenient variant: attacker merely contained in the flagged set.
    std::optional<double> monitor_accuracy_lenient;
    double answer_accuracy = 0.0;
    int attacked_episodes = 0;
    int episodes = 0;
    std::map<std::string, double> monitor_by_attack;
    std::map<std::string, double> monitor_by_topology;
    std::map<std::string, double> answer_by_attack;
    std::map<std::string, double> answer_by_topology;
};

struct CampaignReport {
    CampaignSpec spec;
    std::vector<EpisodeRecord> episodes;
    Metrics metrics;
    std::vector<Transcript> transcripts;  // populated when dump_transcripts

    std::string to_json() const;
    std::string to_csv() const;  // one row per episode
};

struct EpisodeOutcome {
    EpisodeResult result;
    EpisodeRecord record;
};

// Runs one fully seeded episode: simulate, score edges, propagate, detect.
EpisodeOutcome run_episode(const CampaignSpec& spec, int episode_index,
                           const QuarantineState& quarantine);

// Runs the whole campaign. Episodes derive independent seeds from
// (master_seed, index); with no_carryover set they execute in parallel.
CampaignReport run_campaign(const CampaignSpec& spec);

Metrics compute_metrics(const std::vector<EpisodeRecord>& episodes);

}  // namespace masmon

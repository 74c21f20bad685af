#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "masmon/contribution.hpp"
#include "masmon/repair.hpp"
#include "masmon/rng.hpp"
#include "masmon/transcript.hpp"
#include "masmon/types.hpp"

namespace masmon {

enum class TopologyKind { kFlat, kHierarchy };

// flat: all agents broadcast to all peers each round, answering in the last.
// hierarchy: respondents answer to evaluators, evaluators give feedback to
// respondents, respondents answer (3 rounds).
struct TopologySpec {
    TopologyKind kind = TopologyKind::kFlat;
    int respondents = 5;
    int evaluators = 2;  // hierarchy only
    int rounds = 3;      // flat only; hierarchy is fixed at 3

    std::uint32_t agent_count() const;
    void validate() const;
};

enum class AttackKind { kNone, kHarmful, kSuboptimal, kReframing, kTrigger, kModification };

const char* attack_kind_name(AttackKind k);
AttackKind attack_kind_from_name(const std::string& name);

struct AttackSpec {
    AttackKind kind = AttackKind::kNone;
    AgentId attacker = 0;

    void validate(std::uint32_t agent_count) const;
};

// Generative stand-in for LLM agents. Benign agents draw an initial stance
// (correct with probability competence), then move each round toward the
// weighted majority of received stances: every received stance weighs
// `persuasion`, the own stance weighs 1-persuasion, and the harmful
// attacker's message carries an extra factor persuasion/(1-persuasion), so
// full persuasion guarantees adoption while the midrange resists. Ties break
// toward the lexicographically smallest label. Conflicting senders are
// noticed with probability rejection_skill (halved toward the modification
// attacker, certain when attacked by name) and draw explicit rejections once
// argumentative or repeatedly conflicting; agreement clears the slate.
struct BehaviorParams {
    double competence = 0.8;       // p
    double persuasion = 0.5;       // w
    double rejection_skill = 0.7;  // q

    std::vector<std::string> answer_space = {"A", "B", "C", "D"};
    std::string correct_label = "A";
    std::string suboptimal_label = "B";
    std::string wrong_label = "C";  // asserted by harmful / modification attackers

    void validate() const;
};

// Label asserted by the reframing attacker; deliberately outside answer_space.
inline const std::string kReframeLabel = "X";
// Stance recorded for a refusal output.
inline const std::string kRefusalLabel = "REFUSE";

struct EpisodeResult {
    Transcript transcript;
    std::optional<AgentId> ground_truth_attacker;
    bool final_correct = false;
    DetectionReport detection;
    QuarantineState quarantine_after;
    std::uint64_t judge_seed = 0;
};

// Runs one simulated episode and returns its transcript. Messages of
// quarantined senders are suppressed (emitted with no receivers); their final
// answers are recorded but excluded from the majority vote unless
// count_quarantined_votes is set.
Transcript simulate_episode(const TopologySpec& topology, const AttackSpec& attack,
                            const BehaviorParams& behavior, const QuarantineState& quarantine,
                            bool count_quarantined_votes, const std::string& episode_id,
                            Rng& rng);

}  // namespace masmon

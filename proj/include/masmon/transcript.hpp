#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "masmon/types.hpp"

namespace masmon {

// One output emitted by an agent at a given round. Events with receivers are
// messages delivered for the next round; events with an empty receiver list
// record an output nobody hears (final answers, or a sender whose outbound
// traffic is suppressed by quarantine).
struct MessageEvent {
    std::string episode_id;
    int round = 0;  // 1..T
    AgentId sender = 0;
    std::vector<AgentId> receivers;
    std::string content;
    Stance stance;
    std::optional<bool> agrees_with_final;  // final-round events only
};

struct Transcript {
    std::string episode_id;
    std::uint32_t agent_count = 0;  // n
    int round_count = 0;            // T
    std::vector<MessageEvent> events;
    std::string final_decision;
    std::map<AgentId, std::string> final_answers;  // round-T participants only

    // Throws Errc::kEmptyTranscript / kTranscriptInvalid on violations.
    void validate() const;
};

// Majority vote with the lexicographically smallest label as tie-break.
std::string majority_label(const std::vector<std::string>& votes);

// Newline-delimited JSON: one event object per line, then one summary line
// carrying final_decision and final_answers. agent_count and round_count are
// inferred from the event lines.
Transcript read_transcript_jsonl(std::istream& in);
Transcript read_transcript_jsonl_file(const std::string& path);
void write_transcript_jsonl(const Transcript& t, std::ostream& out);
void write_transcript_jsonl_file(const Transcript& t, const std::string& path);

}  // namespace masmon

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "masmon/graph.hpp"
#include "masmon/rng.hpp"
#include "masmon/types.hpp"

namespace masmon {

enum class JudgeKind { kSynthetic, kLlm };

struct JudgeConfig {
    JudgeKind kind = JudgeKind::kSynthetic;

    // synthetic
    double noise_rate = 0.0;  // probability a verdict is replaced by a
                              // uniform draw over the two other values
    std::uint64_t rng_seed = 0;

    // llm
    std::string endpoint_url;
    std::string model_name;
    std::string api_key_env_var = "MASMON_API_KEY";
    int max_retries = 3;
    int request_timeout_sec = 30;
    int concurrency = 4;

    void validate() const;
};

struct SignedGraph {
    const MasGraph* graph = nullptr;
    std::vector<Sign> signs;  // parallel to graph->edges

    Sign sign_of(std::uint32_t edge_index) const { return signs[edge_index]; }
};

// Instruction given to the scoring model, with the two texts of one edge
// substituted into the conversation slot. Throws kEmptyMessage.
std::string build_score_prompt(const std::string& sender_message,
                               const std::string& receiver_output);

struct ScoreParse {
    std::optional<Sign> sign;
    Errc error = Errc::kNoScoreMarker;  // meaningful only when !sign
};

// Scans for the first `[score]` marker (case-insensitive) followed by an
// optionally signed integer token, tolerating whitespace in between.
ScoreParse try_parse_score(const std::string& reply);

// Same, throwing kNoScoreMarker / kOutOfRangeScore.
Sign parse_score(const std::string& reply);

// Deterministic stand-in for the LLM judge. Nominal verdict: positive when
// the receiver's own output carries the sender's stance, negative when the
// receiver explicitly rejected the sender, neutral otherwise. With
// probability `noise_rate` the nominal verdict is replaced by a uniform draw
// over the two other values.
Sign synthetic_verdict(const Stance& sender_stance, const Stance& receiver_out_stance,
                       bool receiver_rejected, double noise_rate, Rng& rng);

// Assigns a sign to every edge. Synthetic judging draws a per-edge substream
// from (rng_seed, canonical edge index), so the result is independent of
// evaluation order and safe to parallelize; LLM judging posts one chat
// completion per edge with bounded concurrency and retries.
SignedGraph score_all_edges(const MasGraph& graph, const JudgeConfig& judge);

// Serial reference for the synthetic path, kept for testing the parallel
// kernel against.
SignedGraph score_all_edges_serial(const MasGraph& graph, const JudgeConfig& judge);

}  // namespace masmon

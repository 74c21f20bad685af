#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace masmon {

// Agent index within one episode, 0..n-1.
using AgentId = std::uint32_t;

// Answer label carried by a message or a final answer. Empty optional means
// the text carried no recognizable stance.
using Stance = std::optional<std::string>;

// Judge verdict for one communication edge.
enum class Sign : std::int8_t {
    kNegative = -1,  // contradictory / distrusting
    kNeutral = 0,    // low contribution, not contradictory
    kPositive = 1,   // agreement / adopted opinion
};

inline int sign_value(Sign s) { return static_cast<int>(s); }

inline Sign sign_from_int(int v) {
    if (v < -1 || v > 1) throw std::invalid_argument("sign out of range");
    return static_cast<Sign>(v);
}

enum class Errc {
    kEmptyTranscript,
    kTranscriptInvalid,
    kNonConsecutiveEdge,
    kDuplicateEdge,
    kEmptyMessage,
    kNoScoreMarker,
    kOutOfRangeScore,
    kJudgeUnavailable,
    kMissingFinalStance,
    kUncoveredInit,
    kTooFewAgents,
    kNoEdges,
    kInvalidSchedule,
    kConfigInvalid,
    kInputUnreadable,
    kStateInvalid,
    kInternal,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
          code_(code),
          detail_(detail) {}

    Errc code() const { return code_; }
    const std::string& detail() const { return detail_; }

  private:
    Errc code_;
    std::string detail_;
};

}  // namespace masmon

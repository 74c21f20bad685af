#include "masmon/types.hpp"

namespace masmon {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::kEmptyTranscript: return "EmptyTranscript";
        case Errc::kTranscriptInvalid: return "TranscriptInvalid";
        case Errc::kNonConsecutiveEdge: return "NonConsecutiveEdge";
        case Errc::kDuplicateEdge: return "DuplicateEdge";
        case Errc::kEmptyMessage: return "EmptyMessage";
        case Errc::kNoScoreMarker: return "NoScoreMarker";
        case Errc::kOutOfRangeScore: return "OutOfRangeScore";
        case Errc::kJudgeUnavailable: return "JudgeUnavailable";
        case Errc::kMissingFinalStance: return "MissingFinalStance";
        case Errc::kUncoveredInit: return "UncoveredInit";
        case Errc::kTooFewAgents: return "TooFewAgents";
        case Errc::kNoEdges: return "NoEdges";
        case Errc::kInvalidSchedule: return "InvalidSchedule";
        case Errc::kConfigInvalid: return "ConfigInvalid";
        case Errc::kInputUnreadable: return "InputUnreadable";
        case Errc::kStateInvalid: return "StateInvalid";
        case Errc::kInternal: return "Internal";
    }
    return "Unknown";
}

}  // namespace masmon

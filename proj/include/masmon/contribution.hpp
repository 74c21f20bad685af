#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "masmon/judge.hpp"
#include "masmon/types.hpp"

namespace masmon {

// Per-node contribution scores, parallel to MasGraph::nodes.
using NodeScores = std::vector<double>;

struct AgentScores {
    std::map<AgentId, double> total;       // mean node score per agent
    std::map<AgentId, int> participation;  // number of rounds with a node
};

struct DetectionConfig {
    double epsilon = 1.5;  // deviation threshold for flagging

    void validate() const;
};

enum class DetectionMethod { kBackprop, kNoBackprop };

const char* detection_method_name(DetectionMethod m);
DetectionMethod detection_method_from_name(const std::string& name);

struct DetectionReport {
    std::set<AgentId> flagged;
    std::map<AgentId, double> deviation;  // backprop: mean absolute gap to the
                                          // other agents; no_bp: mean outgoing
                                          // edge sign
    DetectionMethod method = DetectionMethod::kBackprop;
    double epsilon = 1.5;

    friend bool operator==(const DetectionReport&, const DetectionReport&) = default;
};

// Scores for the final-round nodes: +1 when the agent's final answer matches
// the episode's final decision, -1 otherwise. Entries for non-final nodes are
// unset (NaN). Throws kMissingFinalStance.
NodeScores init_final_scores(const MasGraph& graph, const Transcript& transcript);

// Backward pass over the signed DAG: walking rounds T-1 down to 1, each node
// receives the mean of sign * score over its successors. Non-final nodes
// without successors score 0. `init` must cover exactly the final-round nodes
// (kUncoveredInit otherwise).
//
// backpropagate() parallelizes the nodes within each round; the per-node
// accumulation order is canonical either way, so both variants return
// bit-identical results.
NodeScores backpropagate(const SignedGraph& signed_graph, const NodeScores& init);
NodeScores backpropagate_serial(const SignedGraph& signed_graph, const NodeScores& init);

// Mean node score per agent plus participation counts.
AgentScores total_scores(const NodeScores& scores, const MasGraph& graph);

// Flags every agent whose mean absolute score gap to the other agents
// reaches epsilon. Throws kTooFewAgents below 2 scored agents.
DetectionReport detect(const AgentScores& agent_scores, const DetectionConfig& cfg);

// Ablation baseline without propagation: flags the single agent whose
// outgoing edges carry the lowest mean sign (ties to the smallest id).
// Throws kTooFewAgents / kNoEdges.
DetectionReport detect_no_bp(const SignedGraph& signed_graph);

}  // namespace masmon

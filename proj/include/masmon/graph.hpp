#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "masmon/transcript.hpp"
#include "masmon/types.hpp"

namespace masmon {

// Agent instance at one discussion round. Nodes exist only at rounds where
// the agent actually emitted an output.
struct TemporalNode {
    AgentId agent = 0;
    int round = 0;

    friend bool operator==(const TemporalNode&, const TemporalNode&) = default;
    friend auto operator<=>(const TemporalNode& a, const TemporalNode& b) {
        if (auto c = a.round <=> b.round; c != 0) return c;
        return a.agent <=> b.agent;
    }
};

struct GraphEdge {
    std::uint32_t from = 0;  // node index
    std::uint32_t to = 0;    // node index, always at round from.round + 1
    std::uint32_t event = 0; // index into the source transcript's events
};

// Temporal DAG of one episode. Nodes are sorted by (round, agent); edges are
// sorted by (from, to) under that node order. That canonical order fixes the
// floating-point accumulation order everywhere downstream.
struct MasGraph {
    std::vector<TemporalNode> nodes;
    std::vector<GraphEdge> edges;

    // Per-node output as recorded in the transcript (what the agent emitted
    // at that round). Parallel to `nodes`.
    std::vector<Stance> output_stance;
    std::vector<std::string> output_content;

    // Outgoing edge indices per node, ascending. Parallel to `nodes`.
    std::vector<std::vector<std::uint32_t>> out_edges;

    int round_count = 0;
    std::uint32_t agent_count = 0;

    std::size_t node_count() const { return nodes.size(); }
    std::size_t edge_count() const { return edges.size(); }

    // Index of (agent, round) in `nodes`, or npos.
    static constexpr std::uint32_t npos = 0xFFFFFFFFu;
    std::uint32_t find_node(AgentId agent, int round) const;

    std::size_t out_degree(std::uint32_t node) const { return out_edges[node].size(); }

    // Node indices of round T, ascending.
    std::vector<std::uint32_t> final_round_nodes() const;
};

// Unrolls a transcript into the temporal DAG. One node per (sender, round)
// pair; one edge per (event, receiver) pair, landing on the receiver's output
// node at the next round.
//
// Throws kEmptyTranscript, kNonConsecutiveEdge (a receiver that never outputs
// at round t+1) or kDuplicateEdge (two edges between the same node pair).
MasGraph build_graph(const Transcript& transcript);

// Defense-in-depth check of the construction invariants: every edge advances
// the round by exactly one and the node list is sorted and duplicate-free.
// Violations are described, not thrown.
std::vector<std::string> validate_dag(const MasGraph& graph);

}  // namespace masmon

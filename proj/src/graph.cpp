#include "masmon/graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace masmon {

std::uint32_t MasGraph::find_node(AgentId agent, int round) const {
    TemporalNode key{agent, round};
    auto it = std::lower_bound(nodes.begin(), nodes.end(), key);
    if (it == nodes.end() || !(*it == key)) return npos;
    return static_cast<std::uint32_t>(it - nodes.begin());
}

std::vector<std::uint32_t> MasGraph::final_round_nodes() const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].round == round_count) out.push_back(i);
    return out;
}

MasGraph build_graph(const Transcript& transcript) {
    transcript.validate();

    MasGraph g;
    g.round_count = transcript.round_count;
    g.agent_count = transcript.agent_count;

    // Pass 1: the node set. An agent has a node wherever it emitted an
    // output, i.e. wherever it appears as a sender.
    std::set<TemporalNode> node_set;
    for (const auto& e : transcript.events) node_set.insert({e.sender, e.round});
    g.nodes.assign(node_set.begin(), node_set.end());

    // Node outputs. Several events by the same sender in the same round must
    // agree on the stance; the first content stands for the output text.
    g.output_stance.resize(g.nodes.size());
    g.output_content.resize(g.nodes.size());
    std::vector<bool> seen(g.nodes.size(), false);
    for (const auto& e : transcript.events) {
        std::uint32_t idx = g.find_node(e.sender, e.round);
        if (!seen[idx]) {
            seen[idx] = true;
            g.output_stance[idx] = e.stance;
            g.output_content[idx] = e.content;
        } else if (g.output_stance[idx] != e.stance) {
            std::ostringstream msg;
            msg << "agent " << e.sender << " emits conflicting stances at round " << e.round;
            throw Error(Errc::kTranscriptInvalid, msg.str());
        }
    }

    // Pass 2: one edge per (event, receiver) pair. The receiver must have an
    // output node in the immediately following round; anything else would
    // silently re-time the message.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> edge_keys;
    for (std::uint32_t ei = 0; ei < transcript.events.size(); ++ei) {
        const auto& e = transcript.events[ei];
        std::uint32_t from = g.find_node(e.sender, e.round);
        for (AgentId receiver : e.receivers) {
            std::uint32_t to = g.find_node(receiver, e.round + 1);
            if (to == MasGraph::npos) {
                std::ostringstream msg;
                msg << "message from agent " << e.sender << " at round " << e.round
                    << " to agent " << receiver << " has no consuming output at round "
                    << e.round + 1;
                throw Error(Errc::kNonConsecutiveEdge, msg.str());
            }
            auto [it, inserted] = edge_keys.try_emplace({from, to}, ei);
            if (!inserted) {
                std::ostringstream msg;
                msg << "two messages from agent " << e.sender << " at round " << e.round
                    << " to agent " << receiver;
                throw Error(Errc::kDuplicateEdge, msg.str());
            }
        }
    }

    g.edges.reserve(edge_keys.size());
    for (const auto& [key, event_index] : edge_keys)
        g.edges.push_back({key.first, key.second, event_index});

    g.out_edges.resize(g.nodes.size());
    for (std::uint32_t i = 0; i < g.edges.size(); ++i)
        g.out_edges[g.edges[i].from].push_back(i);

    return g;
}

std::vector<std::string> validate_dag(const MasGraph& graph) {
    std::vector<std::string> violations;
    auto describe = [&](const TemporalNode& n) {
        std::ostringstream s;
        s << "(agent " << n.agent << ", round " << n.round << ")";
        return s.str();
    };

    for (std::size_t i = 1; i < graph.nodes.size(); ++i) {
        if (graph.nodes[i] == graph.nodes[i - 1])
            violations.push_back("repeated node " + describe(graph.nodes[i]));
        else if (graph.nodes[i] < graph.nodes[i - 1])
            violations.push_back("node order broken at " + describe(graph.nodes[i]));
    }

    for (const auto& e : graph.edges) {
        if (e.from >= graph.nodes.size() || e.to >= graph.nodes.size()) {
            violations.push_back("edge endpoint out of range");
            continue;
        }
        const auto& from = graph.nodes[e.from];
        const auto& to = graph.nodes[e.to];
        int step = to.round - from.round;
        if (step == 0)
            violations.push_back("non-advancing edge " + describe(from) + " -> " + describe(to));
        else if (step < 0)
            violations.push_back("backward edge " + describe(from) + " -> " + describe(to));
        else if (step > 1)
            violations.push_back("round skip " + describe(from) + " -> " + describe(to));
        if (from.round < 1 || to.round > graph.round_count)
            violations.push_back("edge outside round range " + describe(from) + " -> " +
                                 describe(to));
    }

    return violations;
}

}  // namespace masmon

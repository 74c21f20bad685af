#pragma once

// Shared helpers for the test suites: random temporal graphs, random
// transcripts, and the naive recursive score oracle the production
// backpropagation is checked against.

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "masmon/contribution.hpp"
#include "masmon/graph.hpp"
#include "masmon/judge.hpp"
#include "masmon/rng.hpp"
#include "masmon/transcript.hpp"

namespace masmon::testutil {

// Naive memoized evaluation of the score recurrence, written directly from
// its definition: final-round nodes keep their initial score, every other
// node averages sign * score over its successors (0 without successors).
// Deliberately independent of the iterative sweep used in production.
class ScoreOracle {
  public:
    ScoreOracle(const SignedGraph& sg, const NodeScores& init)
        : sg_(sg), init_(init), memo_(init.size()), done_(init.size(), false) {}

    double score(std::uint32_t node) {
        if (done_[node]) return memo_[node];
        const MasGraph& g = *sg_.graph;
        double value;
        if (g.nodes[node].round == g.round_count) {
            value = init_[node];
        } else if (g.out_edges[node].empty()) {
            value = 0.0;
        } else {
            double sum = 0.0;
            for (std::uint32_t ei : g.out_edges[node])
                sum += static_cast<double>(sign_value(sg_.signs[ei])) * score(g.edges[ei].to);
            value = sum / static_cast<double>(g.out_edges[node].size());
        }
        done_[node] = true;
        memo_[node] = value;
        return value;
    }

    NodeScores all() {
        NodeScores out(init_.size());
        for (std::uint32_t i = 0; i < out.size(); ++i) out[i] = score(i);
        return out;
    }

  private:
    const SignedGraph& sg_;
    const NodeScores& init_;
    NodeScores memo_;
    std::vector<bool> done_;
};

// Random valid temporal DAG built directly: random per-round participation
// (final round always nonempty), random edges between consecutive-round
// participants. Out-degree-0 interior nodes happen naturally.
inline MasGraph random_graph(Rng& rng, std::uint32_t max_agents = 8, int max_rounds = 6) {
    MasGraph g;
    g.agent_count = 2 + rng.uniform_u32(max_agents - 1);
    g.round_count = 2 + static_cast<int>(rng.uniform_u32(static_cast<std::uint32_t>(max_rounds - 1)));

    std::vector<std::vector<AgentId>> present(g.round_count + 1);
    for (int r = 1; r <= g.round_count; ++r) {
        for (AgentId a = 0; a < g.agent_count; ++a)
            if (rng.bernoulli(0.8)) present[r].push_back(a);
        if (present[r].empty()) present[r].push_back(rng.uniform_u32(g.agent_count));
    }
    for (int r = 1; r <= g.round_count; ++r)
        for (AgentId a : present[r]) g.nodes.push_back({a, r});

    g.output_stance.assign(g.nodes.size(), Stance{});
    g.output_content.assign(g.nodes.size(), "");
    g.out_edges.resize(g.nodes.size());
    for (int r = 1; r < g.round_count; ++r)
        for (AgentId a : present[r])
            for (AgentId b : present[r + 1])
                if (rng.bernoulli(0.55)) {
                    std::uint32_t from = g.find_node(a, r);
                    std::uint32_t to = g.find_node(b, r + 1);
                    std::uint32_t e = static_cast<std::uint32_t>(g.edges.size());
                    g.edges.push_back({from, to, 0});
                    g.out_edges[from].push_back(e);
                }
    return g;
}

inline SignedGraph random_signs(const MasGraph& g, Rng& rng) {
    SignedGraph sg;
    sg.graph = &g;
    sg.signs.resize(g.edge_count());
    for (auto& s : sg.signs) s = static_cast<Sign>(static_cast<int>(rng.uniform_u32(3)) - 1);
    return sg;
}

inline NodeScores random_final_init(const MasGraph& g, Rng& rng, bool plus_minus_one = true) {
    NodeScores init(g.node_count(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < g.node_count(); ++i)
        if (g.nodes[i].round == g.round_count)
            init[i] = plus_minus_one ? (rng.bernoulli(0.5) ? 1.0 : -1.0)
                                     : rng.uniform_real() * 2.0 - 1.0;
    return init;
}

// Random valid transcript: broadcast-style events between consecutive-round
// participants plus final-answer events and a summary.
inline Transcript random_transcript(Rng& rng) {
    Transcript t;
    t.episode_id = "rand";
    t.agent_count = 2 + rng.uniform_u32(5);
    t.round_count = 2 + static_cast<int>(rng.uniform_u32(4));

    std::vector<std::vector<AgentId>> present(t.round_count + 1);
    for (int r = 1; r <= t.round_count; ++r) {
        for (AgentId a = 0; a < t.agent_count; ++a)
            if (rng.bernoulli(0.8)) present[r].push_back(a);
        if (present[r].empty()) present[r].push_back(rng.uniform_u32(t.agent_count));
    }

    const std::vector<std::string> labels = {"A", "B", "C"};
    for (int r = 1; r <= t.round_count; ++r) {
        for (AgentId a : present[r]) {
            MessageEvent e;
            e.episode_id = t.episode_id;
            e.round = r;
            e.sender = a;
            e.stance = labels[rng.uniform_u32(3)];
            e.content = "I think the answer is " + *e.stance + ".";
            if (r < t.round_count)
                for (AgentId b : present[r + 1])
                    if (b != a || rng.bernoulli(0.2))  // occasional self-message
                        e.receivers.push_back(b);
            t.events.push_back(e);
            if (r == t.round_count) t.final_answers[a] = *e.stance;
        }
    }
    std::vector<std::string> votes;
    for (const auto& [agent, label] : t.final_answers) votes.push_back(label);
    t.final_decision = majority_label(votes);
    return t;
}

}  // namespace masmon::testutil

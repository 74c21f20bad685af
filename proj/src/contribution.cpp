#include "masmon/contribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace masmon {

void DetectionConfig::validate() const {
    if (!(epsilon > 0.0)) throw Error(Errc::kConfigInvalid, "epsilon must be > 0");
}

const char* detection_method_name(DetectionMethod m) {
    return m == DetectionMethod::kBackprop ? "backprop" : "no_bp";
}

DetectionMethod detection_method_from_name(const std::string& name) {
    if (name == "backprop") return DetectionMethod::kBackprop;
    if (name == "no_bp") return DetectionMethod::kNoBackprop;
    throw Error(Errc::kConfigInvalid, "unknown detection method '" + name + "'");
}

NodeScores init_final_scores(const MasGraph& graph, const Transcript& transcript) {
    NodeScores scores(graph.node_count(), std::numeric_limits<double>::quiet_NaN());
    for (std::uint32_t idx : graph.final_round_nodes()) {
        AgentId agent = graph.nodes[idx].agent;
        bool agrees;
        if (auto it = transcript.final_answers.find(agent); it != transcript.final_answers.end()) {
            if (transcript.final_decision.empty())
                throw Error(Errc::kMissingFinalStance,
                            "transcript records final answers but no final decision");
            agrees = it->second == transcript.final_decision;
        } else if (const Stance& stance = graph.output_stance[idx];
                   stance && !transcript.final_decision.empty()) {
            agrees = *stance == transcript.final_decision;
        } else {
            // Fall back to an explicit agreement flag on the final-round event.
            std::optional<bool> flag;
            for (const auto& e : transcript.events)
                if (e.round == graph.round_count && e.sender == agent && e.agrees_with_final)
                    flag = e.agrees_with_final;
            if (!flag)
                throw Error(Errc::kMissingFinalStance,
                            "agent " + std::to_string(agent) + " has a round-" +
                                std::to_string(graph.round_count) +
                                " output but no recorded final answer (summary line missing?)");
            agrees = *flag;
        }
        scores[idx] = agrees ? 1.0 : -1.0;
    }
    return scores;
}

namespace {

void check_init_coverage(const SignedGraph& signed_graph, const NodeScores& init) {
    const MasGraph& g = *signed_graph.graph;
    if (init.size() != g.node_count())
        throw Error(Errc::kUncoveredInit, "init size does not match node count");
    if (signed_graph.signs.size() != g.edge_count())
        throw Error(Errc::kUncoveredInit, "sign map does not cover the edge set");
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        bool is_final = g.nodes[i].round == g.round_count;
        bool has_value = !std::isnan(init[i]);
        if (is_final && !has_value)
            throw Error(Errc::kUncoveredInit,
                        "final-round node (agent " + std::to_string(g.nodes[i].agent) +
                            ") missing from init");
        if (!is_final && has_value)
            throw Error(Errc::kUncoveredInit,
                        "init covers non-final node (agent " + std::to_string(g.nodes[i].agent) +
                            ", round " + std::to_string(g.nodes[i].round) + ")");
    }
}

inline double node_update(const MasGraph& g, const SignedGraph& sg, const NodeScores& scores,
                          std::uint32_t node) {
    const auto& outs = g.out_edges[node];
    if (outs.empty()) return 0.0;  // cannot influence the decision
    double sum = 0.0;
    for (std::uint32_t ei : outs)  // canonical edge order fixes the fp accumulation
        sum += static_cast<double>(sign_value(sg.signs[ei])) * scores[g.edges[ei].to];
    return sum / static_cast<double>(outs.size());
}

// Node index ranges per round, rounds ascending.
std::vector<std::pair<std::uint32_t, std::uint32_t>> round_ranges(const MasGraph& g) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;
    std::uint32_t begin = 0;
    for (std::uint32_t i = 1; i <= g.node_count(); ++i) {
        if (i == g.node_count() || g.nodes[i].round != g.nodes[begin].round) {
            ranges.emplace_back(begin, i);
            begin = i;
        }
    }
    return ranges;
}

}  // namespace

NodeScores backpropagate_serial(const SignedGraph& signed_graph, const NodeScores& init) {
    check_init_coverage(signed_graph, init);
    const MasGraph& g = *signed_graph.graph;
    NodeScores scores = init;

    auto ranges = round_ranges(g);
    // Skip the last range (final round, already initialized) and sweep backwards.
    for (auto it = ranges.rbegin() + (ranges.empty() ? 0 : 1); it != ranges.rend(); ++it)
        for (std::uint32_t i = it->first; i < it->second; ++i)
            scores[i] = node_update(g, signed_graph, scores, i);
    return scores;
}

NodeScores backpropagate(const SignedGraph& signed_graph, const NodeScores& init) {
    check_init_coverage(signed_graph, init);
    const MasGraph& g = *signed_graph.graph;
    NodeScores scores = init;

    auto ranges = round_ranges(g);
    for (auto it = ranges.rbegin() + (ranges.empty() ? 0 : 1); it != ranges.rend(); ++it) {
        const std::int64_t begin = it->first;
        const std::int64_t end = it->second;
        // Nodes of one round only read next-round scores, so they are
        // independent; per-node accumulation stays in canonical order, which
        // keeps the result bit-identical to the serial reference.
#pragma omp parallel for schedule(static)
        for (std::int64_t i = begin; i < end; ++i)
            scores[i] = node_update(g, signed_graph, scores, static_cast<std::uint32_t>(i));
    }
    return scores;
}

AgentScores total_scores(const NodeScores& scores, const MasGraph& graph) {
    AgentScores out;
    // nodes are sorted by (round, agent); accumulate per agent in that fixed
    // order, then divide by the participation count.
    std::map<AgentId, double> sums;
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        AgentId a = graph.nodes[i].agent;
        sums[a] += scores[i];
        out.participation[a] += 1;
    }
    for (const auto& [agent, sum] : sums)
        out.total[agent] = sum / static_cast<double>(out.participation[agent]);
    return out;
}

DetectionReport detect(const AgentScores& agent_scores, const DetectionConfig& cfg) {
    cfg.validate();
    const auto& totals = agent_scores.total;
    if (totals.size() < 2)
        throw Error(Errc::kTooFewAgents, "detection needs at least 2 scored agents, have " +
                                             std::to_string(totals.size()));

    DetectionReport report;
    report.method = DetectionMethod::kBackprop;
    report.epsilon = cfg.epsilon;
    const double denom = static_cast<double>(totals.size() - 1);
    for (const auto& [agent, total] : totals) {
        double gap_sum = 0.0;
        for (const auto& [other, other_total] : totals)
            if (other != agent) gap_sum += std::abs(total - other_total);
        double deviation = gap_sum / denom;
        report.deviation[agent] = deviation;
        if (deviation >= cfg.epsilon) report.flagged.insert(agent);
    }
    return report;
}

DetectionReport detect_no_bp(const SignedGraph& signed_graph) {
    const MasGraph& g = *signed_graph.graph;
    std::map<AgentId, std::pair<double, int>> acc;  // agent -> (sign sum, edge count)
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        AgentId a = g.nodes[i].agent;
        auto& slot = acc[a];
        for (std::uint32_t ei : g.out_edges[i]) {
            slot.first += static_cast<double>(sign_value(signed_graph.signs[ei]));
            slot.second += 1;
        }
    }
    if (acc.size() < 2)
        throw Error(Errc::kTooFewAgents, "ablation detection needs at least 2 agents");

    DetectionReport report;
    report.method = DetectionMethod::kNoBackprop;
    bool any_edges = false;
    std::optional<AgentId> lowest;
    double lowest_mean = std::numeric_limits<double>::infinity();
    for (const auto& [agent, slot] : acc) {
        if (slot.second == 0) continue;  // agent never judged; leave it unscored
        any_edges = true;
        double mean = slot.first / static_cast<double>(slot.second);
        report.deviation[agent] = mean;
        if (mean < lowest_mean) {  // map order makes ties pick the smallest id
            lowest_mean = mean;
            lowest = agent;
        }
    }
    if (!any_edges) throw Error(Errc::kNoEdges, "no signed outgoing edges in the graph");
    report.flagged.insert(*lowest);
    return report;
}

}  // namespace masmon

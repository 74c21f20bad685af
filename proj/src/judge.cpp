#include "masmon/judge.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "masmon/llm_client.hpp"
#include "masmon/message_text.hpp"

namespace masmon {

void JudgeConfig::validate() const {
    if (noise_rate < 0.0 || noise_rate > 1.0)
        throw Error(Errc::kConfigInvalid, "judge.noise_rate outside [0,1]");
    if (kind == JudgeKind::kLlm) {
        if (endpoint_url.empty()) throw Error(Errc::kConfigInvalid, "judge.endpoint_url empty");
        if (model_name.empty()) throw Error(Errc::kConfigInvalid, "judge.model_name empty");
        if (api_key_env_var.empty())
            throw Error(Errc::kConfigInvalid, "judge.api_key_env_var empty");
        if (max_retries < 0) throw Error(Errc::kConfigInvalid, "judge.max_retries negative");
        if (concurrency < 1) throw Error(Errc::kConfigInvalid, "judge.concurrency < 1");
    }
}

std::string build_score_prompt(const std::string& sender_message,
                               const std::string& receiver_output) {
    if (sender_message.empty() || receiver_output.empty())
        throw Error(Errc::kEmptyMessage, "score prompt needs both conversation texts");
    return "You are a sentiment analyzer. In the following conversation, an advisor has "
           "responded to an assistant. Please denote whether the advisor agrees with the "
           "assistant, and score it using a grade of 1, -1, or 0. Note that -1 is a "
           "disagreement, 1 is an agreement, and 0 is neutral. Please answer with "
           "'[score] x', replace x with the grade you give.\n\n"
           "Assistant: " +
           sender_message + "\n\nAdvisor: " + receiver_output + "\n";
}

ScoreParse try_parse_score(const std::string& reply) {
    static const std::string marker = "[score]";
    std::size_t pos = 0;
    while (pos + marker.size() <= reply.size()) {
        // case-insensitive search for the marker
        std::size_t hit = std::string::npos;
        for (std::size_t i = pos; i + marker.size() <= reply.size(); ++i) {
            bool match = true;
            for (std::size_t k = 0; k < marker.size(); ++k) {
                if (std::tolower(static_cast<unsigned char>(reply[i + k])) != marker[k]) {
                    match = false;
                    break;
                }
            }
            if (match) {
                hit = i;
                break;
            }
        }
        if (hit == std::string::npos) break;

        std::size_t p = hit + marker.size();
        while (p < reply.size() && std::isspace(static_cast<unsigned char>(reply[p]))) ++p;
        std::size_t start = p;
        if (p < reply.size() && (reply[p] == '-' || reply[p] == '+')) ++p;
        std::size_t digits_begin = p;
        while (p < reply.size() && std::isdigit(static_cast<unsigned char>(reply[p]))) ++p;
        if (p > digits_begin) {
            if (p - digits_begin > 9) return {std::nullopt, Errc::kOutOfRangeScore};
            long value = std::stol(reply.substr(start, p - start));
            if (value < -1 || value > 1) return {std::nullopt, Errc::kOutOfRangeScore};
            return {static_cast<Sign>(value), Errc::kNoScoreMarker};
        }
        pos = hit + marker.size();  // marker without a grade; keep scanning
    }
    return {std::nullopt, Errc::kNoScoreMarker};
}

Sign parse_score(const std::string& reply) {
    ScoreParse p = try_parse_score(reply);
    if (!p.sign) throw Error(p.error, "reply: " + reply.substr(0, 120));
    return *p.sign;
}

Sign synthetic_verdict(const Stance& sender_stance, const Stance& receiver_out_stance,
                       bool receiver_rejected, double noise_rate, Rng& rng) {
    Sign nominal = Sign::kNeutral;
    if (sender_stance && receiver_out_stance && *sender_stance == *receiver_out_stance)
        nominal = Sign::kPositive;
    else if (receiver_rejected)
        nominal = Sign::kNegative;

    if (noise_rate > 0.0 && rng.bernoulli(noise_rate)) {
        std::array<Sign, 2> others{};
        int k = 0;
        for (Sign s : {Sign::kNegative, Sign::kNeutral, Sign::kPositive})
            if (s != nominal) others[k++] = s;
        nominal = others[rng.uniform_u32(2)];
    }
    return nominal;
}

namespace {

Sign judge_edge_synthetic(const MasGraph& graph, std::uint32_t edge_index,
                          const JudgeConfig& cfg) {
    const GraphEdge& e = graph.edges[edge_index];
    const Stance& sender_stance = graph.output_stance[e.from];
    const Stance& receiver_stance = graph.output_stance[e.to];
    bool rejected =
        rejects_agent(graph.output_content[e.to], graph.nodes[e.from].agent);
    Rng rng(mix_seed(cfg.rng_seed, edge_index));
    return synthetic_verdict(sender_stance, receiver_stance, rejected, cfg.noise_rate, rng);
}

}  // namespace

SignedGraph score_all_edges_serial(const MasGraph& graph, const JudgeConfig& judge) {
    judge.validate();
    if (judge.kind == JudgeKind::kLlm) return score_all_edges_llm(graph, judge);

    SignedGraph out;
    out.graph = &graph;
    out.signs.resize(graph.edges.size(), Sign::kNeutral);
    for (std::uint32_t i = 0; i < graph.edges.size(); ++i)
        out.signs[i] = judge_edge_synthetic(graph, i, judge);
    return out;
}

SignedGraph score_all_edges(const MasGraph& graph, const JudgeConfig& judge) {
    judge.validate();
    if (judge.kind == JudgeKind::kLlm) return score_all_edges_llm(graph, judge);

    SignedGraph out;
    out.graph = &graph;
    out.signs.resize(graph.edges.size(), Sign::kNeutral);
    const std::int64_t n = static_cast<std::int64_t>(graph.edges.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        out.signs[i] = judge_edge_synthetic(graph, static_cast<std::uint32_t>(i), judge);
    return out;
}

}  // namespace masmon

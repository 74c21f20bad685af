#include <doctest.h>

#include <set>

#include "masmon/contribution.hpp"
#include "masmon/graph.hpp"
#include "masmon/judge.hpp"
#include "masmon/sim.hpp"
#include "testutil.hpp"

using namespace masmon;

namespace {

struct EpisodePipeline {
    Transcript transcript;
    MasGraph graph;
    SignedGraph signs;
    AgentScores totals;

    EpisodePipeline(const TopologySpec& topo, const AttackSpec& attack,
                    const BehaviorParams& behavior, std::uint64_t seed,
                    double judge_noise = 0.0) {
        Rng rng(seed);
        transcript = simulate_episode(topo, attack, behavior, QuarantineState{}, false, "t", rng);
        graph = build_graph(transcript);
        JudgeConfig judge;
        judge.noise_rate = judge_noise;
        judge.rng_seed = mix_seed(seed, 1);
        signs = score_all_edges(graph, judge);
        NodeScores scores = backpropagate(signs, init_final_scores(graph, transcript));
        totals = total_scores(scores, graph);
    }

    std::vector<Sign> attacker_outgoing(AgentId attacker) const {
        std::vector<Sign> out;
        for (std::size_t i = 0; i < graph.edge_count(); ++i)
            if (graph.nodes[graph.edges[i].from].agent == attacker)
                out.push_back(signs.signs[i]);
        return out;
    }
};

BehaviorParams behavior(double p, double w, double q) {
    BehaviorParams b;
    b.competence = p;
    b.persuasion = w;
    b.rejection_skill = q;
    return b;
}

}  // namespace

TEST_CASE("noiseless unanimous episode: everything positive") {
    EpisodePipeline ep({TopologyKind::kFlat, 5, 2, 3}, {AttackKind::kNone, 0},
                       behavior(1.0, 0.5, 0.7), 42);
    CHECK(ep.transcript.final_decision == "A");
    for (Sign s : ep.signs.signs) CHECK(s == Sign::kPositive);
    for (const auto& [agent, total] : ep.totals.total) CHECK(total == 1.0);
}

TEST_CASE("fully persuadable agents adopt the harmful label") {
    EpisodePipeline ep({TopologyKind::kFlat, 5, 2, 3}, {AttackKind::kHarmful, 0},
                       behavior(1.0, 1.0, 0.7), 42);
    // receivers end on the attacker's label and the group answer is wrong
    CHECK(ep.transcript.final_decision == "C");
    for (const auto& [agent, answer] : ep.transcript.final_answers) CHECK(answer == "C");
    for (Sign s : ep.attacker_outgoing(0)) CHECK(s == Sign::kPositive);
}

TEST_CASE("unpersuadable perfect rejectors isolate the attacker") {
    EpisodePipeline ep({TopologyKind::kFlat, 5, 2, 3}, {AttackKind::kHarmful, 0},
                       behavior(1.0, 0.0, 1.0), 42);
    CHECK(ep.transcript.final_decision == "A");
    auto outgoing = ep.attacker_outgoing(0);
    CHECK(!outgoing.empty());
    for (Sign s : outgoing) CHECK(s == Sign::kNegative);
    // the attacker's mean contribution is strictly minimal
    double attacker_total = ep.totals.total.at(0);
    for (const auto& [agent, total] : ep.totals.total)
        if (agent != 0) CHECK(attacker_total < total);

    DetectionReport report = detect(ep.totals, DetectionConfig{1.5});
    CHECK(report.flagged == std::set<AgentId>{0});
}

TEST_CASE("trigger attack floods the group with refusals when persuasion is high") {
    EpisodePipeline ep({TopologyKind::kFlat, 5, 2, 3}, {AttackKind::kTrigger, 2},
                       behavior(1.0, 1.0, 0.7), 7);
    CHECK(ep.transcript.final_decision == kRefusalLabel);
}

TEST_CASE("modification attacker mimics benign surface form with a flipped label") {
    EpisodePipeline ep({TopologyKind::kFlat, 5, 2, 3}, {AttackKind::kModification, 1},
                       behavior(1.0, 0.3, 0.8), 11);
    bool found_copy = false;
    for (const auto& e : ep.transcript.events) {
        if (e.sender != 1 || e.round == 1) continue;
        CHECK(e.stance == Stance{"C"});
        if (e.content.find("I think the answer is C") != std::string::npos) found_copy = true;
    }
    CHECK(found_copy);
}

TEST_CASE("hierarchy episodes unroll to the expected shape") {
    EpisodePipeline ep({TopologyKind::kHierarchy, 5, 2, 3}, {AttackKind::kNone, 0},
                       behavior(1.0, 0.5, 0.7), 13);
    CHECK(ep.graph.node_count() == 12);  // 5 + 2 + 5
    CHECK(ep.graph.edge_count() == 20);  // 5*2 + 2*5
    CHECK(ep.transcript.final_answers.size() == 5);
    CHECK(validate_dag(ep.graph).empty());
    // evaluators participate exactly once
    CHECK(ep.totals.participation.at(5) == 1);
    CHECK(ep.totals.participation.at(6) == 1);
}

TEST_CASE("harmful evaluator drags respondents in a hierarchy") {
    EpisodePipeline ep({TopologyKind::kHierarchy, 5, 2, 3}, {AttackKind::kHarmful, 5},
                       behavior(1.0, 1.0, 0.7), 17);
    CHECK(ep.transcript.final_decision == "C");
}

TEST_CASE("quarantined senders leave only their final answer on record") {
    QuarantineState q;
    q.quarantined[0] = 3;
    q.strike_count[0] = 1;
    Rng rng(5);
    Transcript t = simulate_episode({TopologyKind::kFlat, 5, 2, 3}, {AttackKind::kHarmful, 0},
                                    behavior(1.0, 0.5, 0.7), q, false, "q", rng);
    int attacker_events = 0;
    for (const auto& e : t.events) {
        if (e.sender == 0) {
            ++attacker_events;
            CHECK(e.round == 3);
            CHECK(e.receivers.empty());
        }
        // mid-round messages cannot target the mute agent, final-round ones can
        if (e.round == 1)
            for (AgentId r : e.receivers) CHECK(r != 0);
    }
    CHECK(attacker_events == 1);
    CHECK(t.final_answers.count(0) == 1);
    CHECK(t.final_decision == "A");  // its wrong vote is not counted

    MasGraph g = build_graph(t);
    CHECK(validate_dag(g).empty());
    for (const auto& e : g.edges) CHECK(g.nodes[e.from].agent != 0);
    // the muted agent is visible globally through its recorded final answer
    CHECK(g.find_node(0, 3) != MasGraph::npos);
    CHECK(g.find_node(0, 1) == MasGraph::npos);
    CHECK(g.find_node(0, 2) == MasGraph::npos);
}

TEST_CASE("episode generation is deterministic in the seed") {
    for (AttackKind kind : {AttackKind::kHarmful, AttackKind::kTrigger, AttackKind::kReframing}) {
        Rng r1(1234), r2(1234);
        Transcript a = simulate_episode({TopologyKind::kFlat, 5, 2, 3}, {kind, 1},
                                        behavior(0.8, 0.5, 0.7), {}, false, "d", r1);
        Transcript b = simulate_episode({TopologyKind::kFlat, 5, 2, 3}, {kind, 1},
                                        behavior(0.8, 0.5, 0.7), {}, false, "d", r2);
        REQUIRE(a.events.size() == b.events.size());
        for (std::size_t i = 0; i < a.events.size(); ++i) {
            CHECK(a.events[i].content == b.events[i].content);
            CHECK(a.events[i].stance == b.events[i].stance);
        }
        CHECK(a.final_decision == b.final_decision);
    }
}

TEST_CASE("random topology/attack draws always produce valid DAGs") {
    Rng rng(909090);
    for (int iter = 0; iter < 300; ++iter) {
        TopologySpec topo;
        topo.kind = rng.bernoulli(0.5) ? TopologyKind::kFlat : TopologyKind::kHierarchy;
        topo.respondents = 2 + static_cast<int>(rng.uniform_u32(6));
        topo.evaluators = 1 + static_cast<int>(rng.uniform_u32(3));
        topo.rounds = 2 + static_cast<int>(rng.uniform_u32(4));
        AttackSpec attack;
        attack.kind = static_cast<AttackKind>(rng.uniform_u32(6));
        attack.attacker = rng.uniform_u32(topo.agent_count());
        BehaviorParams b = behavior(rng.uniform_real(), rng.uniform_real(), rng.uniform_real());

        Rng ep_rng(rng.next_u64());
        Transcript t = simulate_episode(topo, attack, b, {}, false, "p", ep_rng);
        MasGraph g = build_graph(t);
        CHECK(validate_dag(g).empty());
        std::size_t pairs = 0;
        for (const auto& e : t.events) pairs += e.receivers.size();
        CHECK(g.edge_count() == pairs);
        CHECK(g.node_count() <= static_cast<std::size_t>(t.agent_count) * t.round_count);
    }
}

TEST_CASE("unanimous benign episodes sit at zero deviation") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        EpisodePipeline ep({TopologyKind::kFlat, 5, 2, 3}, {AttackKind::kNone, 0},
                           behavior(1.0, 0.5, 0.7), seed);
        DetectionReport report = detect(ep.totals, DetectionConfig{1.5});
        CAPTURE(seed);
        CHECK(report.flagged.empty());
        for (const auto& [agent, dev] : report.deviation) CHECK(dev == 0.0);
    }
}

TEST_CASE("benign-only episodes at default behavior rarely flag anyone") {
    BehaviorParams b;  // defaults: p=0.8, w=0.5, q=0.7
    int flagged_episodes = 0;
    const int episodes = 150;
    for (std::uint64_t seed = 0; seed < episodes; ++seed) {
        EpisodePipeline ep({TopologyKind::kFlat, 5, 2, 3}, {AttackKind::kNone, 0}, b, seed);
        DetectionReport report = detect(ep.totals, DetectionConfig{1.5});
        if (!report.flagged.empty()) ++flagged_episodes;
    }
    CHECK(flagged_episodes <= episodes / 10);
}

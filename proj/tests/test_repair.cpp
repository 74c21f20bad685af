#include <doctest.h>

#include "masmon/repair.hpp"
#include "masmon/rng.hpp"

using namespace masmon;

namespace {

CommPlan flat_plan(AgentId n, int rounds) {
    CommPlan plan;
    for (int r = 1; r <= rounds; ++r)
        for (AgentId a = 0; a < n; ++a) {
            PlannedSend send{r, a, {}};
            for (AgentId b = 0; b < n; ++b)
                if (b != a) send.receivers.push_back(b);
            plan.sends.push_back(send);
        }
    return plan;
}

DetectionReport flags(std::set<AgentId> agents) {
    DetectionReport r;
    r.flagged = std::move(agents);
    return r;
}

}  // namespace

TEST_CASE("quarantine cuts outbound sends only") {
    QuarantineState state;
    state.quarantined[0] = 2;
    state.strike_count[0] = 1;

    CommPlan plan = flat_plan(5, 2);
    RepairedPlan repaired = apply_quarantine(plan, state);
    CHECK(repaired.suppressed_senders == std::set<AgentId>{0});
    for (const auto& send : repaired.effective()) {
        CHECK(send.sender != 0);
        // inbound delivery to the quarantined agent is untouched
    }
    std::size_t to_zero = 0;
    for (const auto& send : repaired.effective())
        for (AgentId r : send.receivers)
            if (r == 0) ++to_zero;
    CHECK(to_zero == 8);  // 4 other agents x 2 rounds
}

TEST_CASE("empty quarantine leaves the plan unchanged") {
    CommPlan plan = flat_plan(4, 3);
    RepairedPlan repaired = apply_quarantine(plan, QuarantineState{});
    CHECK(repaired.effective().size() == plan.sends.size());
}

TEST_CASE("quarantining everyone empties the plan") {
    QuarantineState state;
    for (AgentId a = 0; a < 4; ++a) {
        state.quarantined[a] = 1;
        state.strike_count[a] = 1;
    }
    RepairedPlan repaired = apply_quarantine(flat_plan(4, 3), state);
    CHECK(repaired.effective().empty());
}

TEST_CASE("suppression property over random plans and states") {
    Rng rng(2024);
    for (int iter = 0; iter < 500; ++iter) {
        const AgentId n = 2 + rng.uniform_u32(8);
        CommPlan plan;
        const int sends = static_cast<int>(rng.uniform_u32(30));
        for (int i = 0; i < sends; ++i) {
            PlannedSend s{1 + static_cast<int>(rng.uniform_u32(5)), rng.uniform_u32(n), {}};
            for (AgentId b = 0; b < n; ++b)
                if (rng.bernoulli(0.4)) s.receivers.push_back(b);
            plan.sends.push_back(s);
        }
        QuarantineState state;
        for (AgentId a = 0; a < n; ++a)
            if (rng.bernoulli(0.3)) {
                state.quarantined[a] = 1 + static_cast<int>(rng.uniform_u32(4));
                state.strike_count[a] = 1;
            }

        RepairedPlan repaired = apply_quarantine(plan, state);
        for (const auto& send : repaired.effective())
            CHECK(!state.quarantined.count(send.sender));
        // nothing else is dropped
        std::size_t kept_expected = 0;
        for (const auto& send : plan.sends)
            if (!state.quarantined.count(send.sender)) ++kept_expected;
        CHECK(repaired.effective().size() == kept_expected);
    }
}

TEST_CASE("defense_step: entry, ticking, release and escalation") {
    RepairPolicy policy{3, 2};

    QuarantineState s0;
    QuarantineState s1 = defense_step(s0, flags({0}), policy);
    CHECK(s1.quarantined.at(0) == 3);
    CHECK(s1.strike_count.at(0) == 1);

    // not re-flagged: ticks down and releases at zero, strikes retained
    QuarantineState s2 = defense_step(s1, flags({}), policy);
    CHECK(s2.quarantined.at(0) == 2);
    QuarantineState s3 = defense_step(s2, flags({}), policy);
    CHECK(s3.quarantined.at(0) == 1);
    QuarantineState s4 = defense_step(s3, flags({}), policy);
    CHECK(!s4.quarantined.count(0));
    CHECK(s4.strike_count.at(0) == 1);

    // re-flagged after release: exponential backoff
    QuarantineState s5 = defense_step(s4, flags({0}), policy);
    CHECK(s5.quarantined.at(0) == 6);  // 3 * 2^1
    CHECK(s5.strike_count.at(0) == 2);

    // flagged while still held: keeps ticking, no double entry
    QuarantineState s6 = defense_step(s5, flags({0}), policy);
    CHECK(s6.quarantined.at(0) == 5);
    CHECK(s6.strike_count.at(0) == 2);
}

TEST_CASE("backoff factor 1 keeps the duration constant") {
    RepairPolicy policy{4, 1};
    QuarantineState state;
    for (int round = 0; round < 3; ++round) {
        state = defense_step(state, flags({2}), policy);
        CHECK(state.quarantined.at(2) == 4);
        while (state.quarantined.count(2)) state = defense_step(state, flags({}), policy);
    }
    CHECK(state.strike_count.at(2) == 3);
}

TEST_CASE("counters never go negative across random flag sequences") {
    Rng rng(555);
    RepairPolicy policy{2, 2};
    QuarantineState state;
    for (int step = 0; step < 300; ++step) {
        std::set<AgentId> flagged;
        for (AgentId a = 0; a < 5; ++a)
            if (rng.bernoulli(0.2)) flagged.insert(a);
        state = defense_step(state, flags(flagged), policy);
        for (const auto& [agent, remaining] : state.quarantined) {
            CHECK(remaining >= 1);
            CHECK(state.strike_count.at(agent) >= 1);
        }
    }
}

TEST_CASE("state survives a json round-trip") {
    QuarantineState state;
    state.quarantined = {{1, 4}, {3, 1}};
    state.strike_count = {{1, 2}, {3, 1}, {4, 5}};
    QuarantineState back = QuarantineState::from_json(state.to_json());
    CHECK(back.quarantined == state.quarantined);
    CHECK(back.strike_count == state.strike_count);

    CHECK_THROWS_AS(QuarantineState::from_json("{\"quarantined\":{\"0\":0}}"), Error);
}

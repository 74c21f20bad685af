#include "masmon/sim.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "masmon/message_text.hpp"

namespace masmon {

std::uint32_t TopologySpec::agent_count() const {
    return kind == TopologyKind::kFlat ? static_cast<std::uint32_t>(respondents)
                                       : static_cast<std::uint32_t>(respondents + evaluators);
}

void TopologySpec::validate() const {
    if (respondents < 2) throw Error(Errc::kInvalidSchedule, "topology needs >= 2 respondents");
    if (kind == TopologyKind::kHierarchy && evaluators < 1)
        throw Error(Errc::kInvalidSchedule, "hierarchy needs >= 1 evaluator");
    if (kind == TopologyKind::kFlat && rounds < 1)
        throw Error(Errc::kInvalidSchedule, "flat topology needs >= 1 round");
}

const char* attack_kind_name(AttackKind k) {
    switch (k) {
        case AttackKind::kNone: return "none";
        case AttackKind::kHarmful: return "harmful";
        case AttackKind::kSuboptimal: return "suboptimal";
        case AttackKind::kReframing: return "reframing";
        case AttackKind::kTrigger: return "trigger";
        case AttackKind::kModification: return "modification";
    }
    return "none";
}

AttackKind attack_kind_from_name(const std::string& name) {
    for (AttackKind k : {AttackKind::kNone, AttackKind::kHarmful, AttackKind::kSuboptimal,
                         AttackKind::kReframing, AttackKind::kTrigger, AttackKind::kModification})
        if (name == attack_kind_name(k)) return k;
    throw Error(Errc::kConfigInvalid, "unknown attack kind '" + name + "'");
}

void AttackSpec::validate(std::uint32_t agent_count) const {
    if (kind != AttackKind::kNone && attacker >= agent_count)
        throw Error(Errc::kInvalidSchedule, "attacker id " + std::to_string(attacker) +
                                                " outside agent range 0.." +
                                                std::to_string(agent_count - 1));
}

void BehaviorParams::validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(competence) || !in_unit(persuasion) || !in_unit(rejection_skill))
        throw Error(Errc::kConfigInvalid, "behavior probabilities must lie in [0,1]");
    if (answer_space.size() < 3)
        throw Error(Errc::kConfigInvalid, "answer_space needs at least 3 labels");
    auto present = [&](const std::string& l) {
        return std::find(answer_space.begin(), answer_space.end(), l) != answer_space.end();
    };
    if (!present(correct_label) || !present(suboptimal_label) || !present(wrong_label))
        throw Error(Errc::kConfigInvalid,
                    "correct/suboptimal/wrong labels must come from answer_space");
}

namespace {

struct RoundPlan {
    // Sends of one round, senders ascending. Final-round sends carry no
    // receivers: the answer goes to the aggregator, not to peers.
    std::vector<PlannedSend> sends;
};

std::vector<RoundPlan> build_schedule(const TopologySpec& topology) {
    std::vector<RoundPlan> schedule;
    const AgentId n = topology.agent_count();
    if (topology.kind == TopologyKind::kFlat) {
        schedule.resize(topology.rounds);
        for (int r = 1; r <= topology.rounds; ++r) {
            for (AgentId a = 0; a < n; ++a) {
                PlannedSend send{r, a, {}};
                if (r < topology.rounds)
                    for (AgentId b = 0; b < n; ++b)
                        if (b != a) send.receivers.push_back(b);
                schedule[r - 1].sends.push_back(std::move(send));
            }
        }
    } else {
        const AgentId nr = static_cast<AgentId>(topology.respondents);
        schedule.resize(3);
        for (AgentId a = 0; a < nr; ++a) {
            PlannedSend send{1, a, {}};
            for (AgentId e = nr; e < n; ++e) send.receivers.push_back(e);
            schedule[0].sends.push_back(std::move(send));
        }
        for (AgentId e = nr; e < n; ++e) {
            PlannedSend send{2, e, {}};
            for (AgentId a = 0; a < nr; ++a) send.receivers.push_back(a);
            schedule[1].sends.push_back(std::move(send));
        }
        for (AgentId a = 0; a < nr; ++a) schedule[2].sends.push_back({3, a, {}});
    }
    return schedule;
}

struct Delivery {
    AgentId sender;
    Stance stance;
    std::string content;
    // Rhetoric that pushes against other positions (persuasive wrong answers,
    // refusal warnings, messages carrying rejections) invites immediate
    // push-back; a bare answer does not.
    bool argumentative = false;
};

// Extra tally weight of the harmful attacker's message. Grows without bound
// as persuasion approaches 1 (guaranteed adoption) but stays neutral around
// the middle of the range, where the majority can still win.
double harmful_boost(double persuasion) {
    if (persuasion >= 1.0) return 1e9;
    return std::min(persuasion / (1.0 - persuasion), 1e9);
}

}  // namespace

Transcript simulate_episode(const TopologySpec& topology, const AttackSpec& attack,
                            const BehaviorParams& behavior, const QuarantineState& quarantine,
                            bool count_quarantined_votes, const std::string& episode_id,
                            Rng& rng) {
    topology.validate();
    behavior.validate();
    const AgentId n = topology.agent_count();
    attack.validate(n);

    const bool attacked = attack.kind != AttackKind::kNone;
    const AgentId attacker = attack.attacker;
    const auto schedule = build_schedule(topology);
    const int total_rounds = static_cast<int>(schedule.size());

    CommPlan plan;
    for (const auto& round : schedule)
        for (const auto& send : round.sends) plan.sends.push_back(send);
    const RepairedPlan repaired = apply_quarantine(plan, quarantine);
    const auto& suppressed = repaired.suppressed_senders;

    std::string attack_label;
    if (attacked) {
        switch (attack.kind) {
            case AttackKind::kHarmful:
            case AttackKind::kModification: attack_label = behavior.wrong_label; break;
            case AttackKind::kSuboptimal: attack_label = behavior.suboptimal_label; break;
            case AttackKind::kReframing: attack_label = kReframeLabel; break;
            case AttackKind::kTrigger: attack_label = kRefusalLabel; break;
            case AttackKind::kNone: break;
        }
    }

    std::vector<Stance> held(n);  // current internal stance per agent
    std::vector<std::vector<Delivery>> inbox(n);
    // Distrust dynamics per receiver: a conflicting sender is noticed with
    // probability rejection_skill and stays noticed while it keeps
    // conflicting. Explicit rejection flags go to noticed senders that are
    // argumentative or conflict repeatedly; agreeing again clears the slate.
    std::vector<std::set<AgentId>> noticed(n);
    std::vector<std::set<AgentId>> conflicted_before(n);

    // Returns whether receiver `a` emits a rejection flag for delivery `d`.
    auto update_distrust = [&](AgentId a, const Delivery& d, bool conflicting,
                               double skill_factor, Rng& r) {
        if (!conflicting) {
            noticed[a].erase(d.sender);
            conflicted_before[a].erase(d.sender);
            return false;
        }
        bool repeat = conflicted_before[a].count(d.sender) > 0;
        conflicted_before[a].insert(d.sender);
        if (rejects_agent(d.content, a)) {
            // being attacked by name is always noticed
            noticed[a].insert(d.sender);
        } else if (!noticed[a].count(d.sender) &&
                   r.bernoulli(behavior.rejection_skill * skill_factor)) {
            noticed[a].insert(d.sender);
        }
        return noticed[a].count(d.sender) > 0 && (d.argumentative || repeat);
    };

    Transcript t;
    t.episode_id = episode_id;
    t.agent_count = n;
    t.round_count = total_rounds;

    for (int r = 1; r <= total_rounds; ++r) {
        const bool final_round = r == total_rounds;
        std::vector<std::vector<Delivery>> next_inbox(n);

        for (const auto& send : schedule[r - 1].sends) {
            const AgentId a = send.sender;
            Stance out_stance;
            std::string content;
            std::vector<AgentId> rejected;

            if (attacked && a == attacker && attack.kind == AttackKind::kHarmful) {
                out_stance = attack_label;
                // Argues against everything that contradicts it, every time.
                for (const auto& d : inbox[a])
                    if (!d.stance || *d.stance != attack_label) rejected.push_back(d.sender);
                content = final_round ? final_answer_text(attack_label, rejected)
                                      : persuasive_message_text(attack_label, rejected);
            } else if (attacked && a == attacker && attack.kind == AttackKind::kTrigger) {
                out_stance = kRefusalLabel;
                content = refusal_text();
            } else if (attacked && a == attacker && attack.kind == AttackKind::kModification) {
                out_stance = attack_label;
                const Delivery* source = nullptr;
                for (const auto& d : inbox[a])
                    if (d.stance && *d.stance != kRefusalLabel && !source) source = &d;
                if (source)
                    content = swap_label(source->content, *source->stance, attack_label);
                else
                    content = final_round ? final_answer_text(attack_label, {})
                                          : stance_message_text(attack_label, {});
            } else if (attacked && a == attacker) {
                // suboptimal / reframing: a covert attacker that otherwise
                // behaves like a benign participant.
                out_stance = attack_label;
                for (const auto& d : inbox[a]) {
                    bool conflicting = !d.stance || *d.stance != attack_label;
                    if (update_distrust(a, d, conflicting, 1.0, rng)) rejected.push_back(d.sender);
                }
                content = final_round ? final_answer_text(attack_label, rejected)
                                      : stance_message_text(attack_label, rejected);
            } else {
                // -------- benign agent --------
                if (r == 1 && !held[a]) {
                    if (rng.bernoulli(behavior.competence)) {
                        held[a] = behavior.correct_label;
                    } else {
                        std::vector<std::string> wrong;
                        for (const auto& l : behavior.answer_space)
                            if (l != behavior.correct_label) wrong.push_back(l);
                        held[a] = rng.pick(wrong);
                    }
                }

                bool refused = false;
                bool saw_refusal = false;
                for (const auto& d : inbox[a])
                    if (d.stance && *d.stance == kRefusalLabel) saw_refusal = true;
                if (saw_refusal && rng.bernoulli(behavior.persuasion)) refused = true;

                if (refused) {
                    out_stance = kRefusalLabel;
                    content = refusal_text();
                } else {
                    if (!inbox[a].empty()) {
                        // Weighted majority: received stances weigh w each,
                        // the own stance 1-w, so persuasion interpolates
                        // between immovable and fully persuadable. Smallest
                        // label wins ties.
                        std::map<std::string, double> tally;
                        if (held[a]) tally[*held[a]] += 1.0 - behavior.persuasion;
                        const double recv_weight = held[a] ? behavior.persuasion : 1.0;
                        for (const auto& d : inbox[a]) {
                            if (!d.stance || *d.stance == kRefusalLabel) continue;
                            double weight = recv_weight;
                            if (attacked && d.sender == attacker &&
                                attack.kind == AttackKind::kHarmful)
                                weight *= harmful_boost(behavior.persuasion);
                            tally[*d.stance] += weight;
                        }
                        std::string best;
                        double best_weight = -1.0;
                        for (const auto& [label, weight] : tally) {
                            if (weight > best_weight) {
                                best = label;
                                best_weight = weight;
                            }
                        }
                        if (!tally.empty()) held[a] = best;
                    }
                    out_stance = held[a];
                    for (const auto& d : inbox[a]) {
                        bool conflicting = !d.stance || !out_stance || *d.stance != *out_stance;
                        double factor = 1.0;
                        if (attacked && d.sender == attacker &&
                            attack.kind == AttackKind::kModification)
                            factor = 0.5;  // near-duplicates read as plausible
                        if (update_distrust(a, d, conflicting, factor, rng))
                            rejected.push_back(d.sender);
                    }
                    const std::string label = out_stance ? *out_stance : "?";
                    content = final_round ? final_answer_text(label, rejected)
                                          : stance_message_text(label, rejected);
                }
            }

            // The transcript records the discussion as it actually happened:
            // a sender whose messages are cut leaves no mid-round trace (its
            // unheard output is not part of the discussion), and a message
            // can only be recorded toward receivers that will speak again --
            // a muted receiver has no next-round output to consume it, except
            // in the final round, where its answer is always on record.
            if (!suppressed.count(a) || final_round) {
                MessageEvent event;
                event.episode_id = episode_id;
                event.round = r;
                event.sender = a;
                if (!suppressed.count(a))
                    for (AgentId receiver : send.receivers)
                        if (!suppressed.count(receiver) || r + 1 == total_rounds)
                            event.receivers.push_back(receiver);
                event.content = content;
                event.stance = out_stance;
                t.events.push_back(event);
            }

            // Delivery is unaffected by recording: muted agents still hear
            // everything and everyone still hears the non-muted. Whether a
            // message reads as argumentative is a property of its text, which
            // matters for mimicked content that copies rejection clauses.
            const bool argumentative =
                !parse_rejected_agents(content).empty() ||
                (out_stance && *out_stance == kRefusalLabel) ||
                (attacked && a == attacker && attack.kind == AttackKind::kHarmful);
            if (!suppressed.count(a))
                for (AgentId receiver : send.receivers)
                    next_inbox[receiver].push_back({a, out_stance, content, argumentative});

            if (final_round && out_stance) t.final_answers[a] = *out_stance;
        }

        inbox = std::move(next_inbox);
    }

    // Refusals are not answers; the aggregator decides over the answers it
    // actually received and reports a refusal only when there is nothing else.
    std::vector<std::string> votes;
    for (const auto& [agent, answer] : t.final_answers)
        if ((count_quarantined_votes || !suppressed.count(agent)) && answer != kRefusalLabel)
            votes.push_back(answer);
    if (votes.empty())
        for (const auto& [agent, answer] : t.final_answers)
            if (answer != kRefusalLabel) votes.push_back(answer);
    if (votes.empty()) votes.push_back(kRefusalLabel);
    t.final_decision = majority_label(votes);

    for (auto& event : t.events)
        if (event.round == total_rounds && event.stance)
            event.agrees_with_final = *event.stance == t.final_decision;

    return t;
}

}  // namespace masmon

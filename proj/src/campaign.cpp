#include "masmon/campaign.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "masmon/version.hpp"

namespace masmon {

using nlohmann::json;

namespace {

const char* topology_kind_name(TopologyKind k) {
    return k == TopologyKind::kFlat ? "flat" : "hierarchy";
}

TopologyKind topology_kind_from_name(const std::string& name, const std::string& path) {
    if (name == "flat") return TopologyKind::kFlat;
    if (name == "hierarchy") return TopologyKind::kHierarchy;
    throw Error(Errc::kConfigInvalid, path + ": unknown topology kind '" + name + "'");
}

template <typename T>
T get_field(const json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(Errc::kConfigInvalid, path + "." + key + ": wrong type");
    }
}

json topology_to_json(const TopologySpec& s) {
    return json{{"kind", topology_kind_name(s.kind)},
                {"respondents", s.respondents},
                {"evaluators", s.evaluators},
                {"rounds", s.rounds}};
}

TopologySpec topology_from_json(const json& j, const std::string& path) {
    TopologySpec s;
    s.kind = topology_kind_from_name(get_field<std::string>(j, path, "kind", "flat"), path);
    s.respondents = get_field<int>(j, path, "respondents", s.respondents);
    s.evaluators = get_field<int>(j, path, "evaluators", s.evaluators);
    s.rounds = get_field<int>(j, path, "rounds", s.rounds);
    return s;
}

json attack_to_json(const AttackSpec& s) {
    return json{{"kind", attack_kind_name(s.kind)}, {"attacker", s.attacker}};
}

AttackSpec attack_from_json(const json& j, const std::string& path) {
    AttackSpec s;
    s.kind = attack_kind_from_name(get_field<std::string>(j, path, "kind", "none"));
    s.attacker = get_field<AgentId>(j, path, "attacker", 0);
    return s;
}

}  // namespace

void CampaignSpec::validate() const {
    if (episodes < 0) throw Error(Errc::kConfigInvalid, "episodes: must be >= 0");
    if (topology_schedule.empty())
        throw Error(Errc::kConfigInvalid, "topology: schedule must not be empty");
    if (attack_schedule.empty())
        throw Error(Errc::kConfigInvalid, "attack: schedule must not be empty");
    for (const auto& t : topology_schedule) t.validate();
    behavior.validate();
    judge.validate();
    detection.validate();
    repair.validate();
    // Attacker ids must make sense for every (topology, attack) pairing that
    // the cycling schedules can produce.
    if (!rotate_attacker)
        for (std::size_t e = 0; e < topology_schedule.size() * attack_schedule.size(); ++e)
            attack_schedule[e % attack_schedule.size()].validate(
                topology_schedule[e % topology_schedule.size()].agent_count());
}

std::string CampaignSpec::to_json() const {
    json j;
    j["episodes"] = episodes;
    j["master_seed"] = master_seed;
    json topo = json::array();
    for (const auto& t : topology_schedule) topo.push_back(topology_to_json(t));
    j["topology"] = topo;
    json att = json::array();
    for (const auto& a : attack_schedule) att.push_back(attack_to_json(a));
    j["attack"] = att;
    j["rotate_attacker"] = rotate_attacker;
    j["behavior"] = json{{"competence", behavior.competence},
                         {"persuasion", behavior.persuasion},
                         {"rejection_skill", behavior.rejection_skill},
                         {"answer_space", behavior.answer_space},
                         {"correct_label", behavior.correct_label},
                         {"suboptimal_label", behavior.suboptimal_label},
                         {"wrong_label", behavior.wrong_label}};
    json jj;
    jj["kind"] = judge.kind == JudgeKind::kSynthetic ? "synthetic" : "llm";
    jj["noise_rate"] = judge.noise_rate;
    if (judge.kind == JudgeKind::kLlm) {
        jj["endpoint_url"] = judge.endpoint_url;
        jj["model_name"] = judge.model_name;
        jj["api_key_env_var"] = judge.api_key_env_var;
        jj["max_retries"] = judge.max_retries;
        jj["request_timeout_sec"] = judge.request_timeout_sec;
        jj["concurrency"] = judge.concurrency;
    }
    j["judge"] = jj;
    j["detection"] = json{{"epsilon", detection.epsilon}};
    j["method"] = detection_method_name(method);
    j["repair"] = json{{"enabled", repair_enabled},
                       {"base_quarantine", repair.base_quarantine},
                       {"backoff_factor", repair.backoff_factor},
                       {"count_quarantined_votes", count_quarantined_votes}};
    j["dump_transcripts"] = dump_transcripts;
    j["no_carryover"] = no_carryover;
    return j.dump(2);
}

CampaignSpec CampaignSpec::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::kConfigInvalid, std::string("config is not valid JSON: ") + e.what());
    }
    CampaignSpec spec;
    spec.episodes = get_field<int>(j, "$", "episodes", spec.episodes);
    spec.master_seed = get_field<std::uint64_t>(j, "$", "master_seed", spec.master_seed);

    if (j.contains("topology")) {
        spec.topology_schedule.clear();
        if (j["topology"].is_array()) {
            int i = 0;
            for (const auto& item : j["topology"])
                spec.topology_schedule.push_back(
                    topology_from_json(item, "topology[" + std::to_string(i++) + "]"));
        } else {
            spec.topology_schedule.push_back(topology_from_json(j["topology"], "topology"));
        }
    }
    if (j.contains("attack")) {
        spec.attack_schedule.clear();
        if (j["attack"].is_array()) {
            int i = 0;
            for (const auto& item : j["attack"])
                spec.attack_schedule.push_back(
                    attack_from_json(item, "attack[" + std::to_string(i++) + "]"));
        } else {
            spec.attack_schedule.push_back(attack_from_json(j["attack"], "attack"));
        }
    }
    spec.rotate_attacker = get_field<bool>(j, "$", "rotate_attacker", false);

    if (j.contains("behavior")) {
        const json& b = j["behavior"];
        spec.behavior.competence = get_field<double>(b, "behavior", "competence", 0.8);
        spec.behavior.persuasion = get_field<double>(b, "behavior", "persuasion", 0.5);
        spec.behavior.rejection_skill =
            get_field<double>(b, "behavior", "rejection_skill", 0.7);
        spec.behavior.answer_space = get_field<std::vector<std::string>>(
            b, "behavior", "answer_space", spec.behavior.answer_space);
        spec.behavior.correct_label =
            get_field<std::string>(b, "behavior", "correct_label", spec.behavior.correct_label);
        spec.behavior.suboptimal_label = get_field<std::string>(
            b, "behavior", "suboptimal_label", spec.behavior.suboptimal_label);
        spec.behavior.wrong_label =
            get_field<std::string>(b, "behavior", "wrong_label", spec.behavior.wrong_label);
    }
    if (j.contains("judge")) {
        const json& jj = j["judge"];
        std::string kind = get_field<std::string>(jj, "judge", "kind", "synthetic");
        if (kind == "synthetic") {
            spec.judge.kind = JudgeKind::kSynthetic;
        } else if (kind == "llm") {
            spec.judge.kind = JudgeKind::kLlm;
        } else {
            throw Error(Errc::kConfigInvalid, "judge.kind: must be synthetic or llm");
        }
        spec.judge.noise_rate = get_field<double>(jj, "judge", "noise_rate", 0.0);
        spec.judge.endpoint_url = get_field<std::string>(jj, "judge", "endpoint_url", "");
        spec.judge.model_name = get_field<std::string>(jj, "judge", "model_name", "");
        spec.judge.api_key_env_var =
            get_field<std::string>(jj, "judge", "api_key_env_var", spec.judge.api_key_env_var);
        spec.judge.max_retries = get_field<int>(jj, "judge", "max_retries", 3);
        spec.judge.request_timeout_sec = get_field<int>(jj, "judge", "request_timeout_sec", 30);
        spec.judge.concurrency = get_field<int>(jj, "judge", "concurrency", 4);
    }
    if (j.contains("detection"))
        spec.detection.epsilon = get_field<double>(j["detection"], "detection", "epsilon", 1.5);
    spec.method =
        detection_method_from_name(get_field<std::string>(j, "$", "method", "backprop"));
    if (j.contains("repair")) {
        const json& r = j["repair"];
        spec.repair_enabled = get_field<bool>(r, "repair", "enabled", false);
        spec.repair.base_quarantine = get_field<int>(r, "repair", "base_quarantine", 3);
        spec.repair.backoff_factor = get_field<int>(r, "repair", "backoff_factor", 2);
        spec.count_quarantined_votes =
            get_field<bool>(r, "repair", "count_quarantined_votes", false);
    }
    spec.dump_transcripts = get_field<bool>(j, "$", "dump_transcripts", false);
    spec.no_carryover = get_field<bool>(j, "$", "no_carryover", false);

    spec.validate();
    return spec;
}

CampaignSpec CampaignSpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::kInputUnreadable, "cannot open config " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

EpisodeOutcome run_episode(const CampaignSpec& spec, int episode_index,
                           const QuarantineState& quarantine) {
    const std::uint64_t sim_seed = mix_seed(spec.master_seed, 2ull * episode_index);
    const std::uint64_t judge_seed = mix_seed(spec.master_seed, 2ull * episode_index + 1);

    TopologySpec topology = spec.topology_schedule[episode_index % spec.topology_schedule.size()];
    AttackSpec attack = spec.attack_schedule[episode_index % spec.attack_schedule.size()];
    if (spec.rotate_attacker && attack.kind != AttackKind::kNone)
        attack.attacker = static_cast<AgentId>((attack.attacker + episode_index) %
                                               topology.agent_count());
    attack.validate(topology.agent_count());

    std::ostringstream id;
    id << "ep" << episode_index;

    Rng rng(sim_seed);
    EpisodeOutcome out;
    out.result.transcript =
        simulate_episode(topology, attack, spec.behavior, quarantine,
                         spec.count_quarantined_votes, id.str(), rng);
    out.result.ground_truth_attacker =
        attack.kind == AttackKind::kNone ? std::optional<AgentId>{} : attack.attacker;
    out.result.final_correct =
        out.result.transcript.final_decision == spec.behavior.correct_label;
    out.result.judge_seed = judge_seed;

    MasGraph graph = build_graph(out.result.transcript);
    JudgeConfig judge = spec.judge;
    judge.rng_seed = judge_seed;
    SignedGraph signed_graph = score_all_edges(graph, judge);

    if (spec.method == DetectionMethod::kBackprop) {
        NodeScores init = init_final_scores(graph, out.result.transcript);
        NodeScores scores = backpropagate(signed_graph, init);
        AgentScores totals = total_scores(scores, graph);
        out.result.detection = detect(totals, spec.detection);
    } else if (graph.edge_count() == 0) {
        // Edge-sign averages have nothing to work with when quarantine has
        // silenced the whole discussion; the ablation detector abstains
        // rather than aborting the campaign.
        out.result.detection.method = DetectionMethod::kNoBackprop;
        out.result.detection.epsilon = spec.detection.epsilon;
    } else {
        out.result.detection = detect_no_bp(signed_graph);
        out.result.detection.epsilon = spec.detection.epsilon;
    }

    out.record.episode = episode_index;
    out.record.topology = topology.kind;
    out.record.attack = attack.kind;
    out.record.attacker = out.result.ground_truth_attacker;
    out.record.detection = out.result.detection;
    out.record.final_correct = out.result.final_correct;
    out.record.final_decision = out.result.transcript.final_decision;
    out.record.judge_seed = judge_seed;
    for (const auto& [agent, remaining] : quarantine.quarantined) {
        (void)remaining;
        out.record.quarantined_before.push_back(agent);
    }
    return out;
}

CampaignReport run_campaign(const CampaignSpec& spec) {
    spec.validate();
    CampaignReport report;
    report.spec = spec;
    report.episodes.resize(spec.episodes);
    if (spec.dump_transcripts) report.transcripts.resize(spec.episodes);

    if (spec.no_carryover && !spec.repair_enabled) {
        // Independent seeds make episodes order-free, so the loop can fan out.
        // Exceptions must not unwind through the parallel region.
        std::vector<EpisodeOutcome> outcomes(spec.episodes);
        const std::int64_t n = spec.episodes;
        std::exception_ptr first_error;
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t e = 0; e < n; ++e) {
            try {
                outcomes[e] = run_episode(spec, static_cast<int>(e), QuarantineState{});
            } catch (...) {
#pragma omp critical
                if (!first_error) first_error = std::current_exception();
            }
        }
        if (first_error) std::rethrow_exception(first_error);
        for (int e = 0; e < spec.episodes; ++e) {
            report.episodes[e] = outcomes[e].record;
            if (spec.dump_transcripts)
                report.transcripts[e] = std::move(outcomes[e].result.transcript);
        }
    } else {
        QuarantineState state;
        for (int e = 0; e < spec.episodes; ++e) {
            EpisodeOutcome outcome = run_episode(spec, e, state);
            if (spec.repair_enabled)
                state = defense_step(state, outcome.record.detection, spec.repair);
            outcome.result.quarantine_after = state;
            report.episodes[e] = outcome.record;
            if (spec.dump_transcripts)
                report.transcripts[e] = std::move(outcome.result.transcript);
        }
    }

    report.metrics = compute_metrics(report.episodes);
    return report;
}

Metrics compute_metrics(const std::vector<EpisodeRecord>& episodes) {
    Metrics m;
    m.episodes = static_cast<int>(episodes.size());
    int exact_hits = 0, lenient_hits = 0, correct = 0;
    std::map<std::string, std::pair<int, int>> by_attack, by_topology;      // hits/attacked
    std::map<std::string, std::pair<int, int>> ans_attack, ans_topology;    // correct/total

    for (const auto& ep : episodes) {
        const std::string attack = attack_kind_name(ep.attack);
        const std::string topo = topology_kind_name(ep.topology);
        if (ep.final_correct) ++correct;
        ans_attack[attack].second++;
        ans_topology[topo].second++;
        if (ep.final_correct) {
            ans_attack[attack].first++;
            ans_topology[topo].first++;
        }
        if (!ep.attacker) continue;
        ++m.attacked_episodes;
        bool exact = ep.detection.flagged.size() == 1 &&
                     *ep.detection.flagged.begin() == *ep.attacker;
        bool lenient = ep.detection.flagged.count(*ep.attacker) > 0;
        if (exact) ++exact_hits;
        if (lenient) ++lenient_hits;
        by_attack[attack].second++;
        by_topology[topo].second++;
        if (exact) {
            by_attack[attack].first++;
            by_topology[topo].first++;
        }
    }

    if (m.episodes > 0) m.answer_accuracy = static_cast<double>(correct) / m.episodes;
    if (m.attacked_episodes > 0) {
        m.monitor_accuracy = static_cast<double>(exact_hits) / m.attacked_episodes;
        m.monitor_accuracy_lenient = static_cast<double>(lenient_hits) / m.attacked_episodes;
    }
    for (const auto& [key, counts] : by_attack)
        if (counts.second > 0)
            m.monitor_by_attack[key] = static_cast<double>(counts.first) / counts.second;
    for (const auto& [key, counts] : by_topology)
        if (counts.second > 0)
            m.monitor_by_topology[key] = static_cast<double>(counts.first) / counts.second;
    for (const auto& [key, counts] : ans_attack)
        if (counts.second > 0)
            m.answer_by_attack[key] = static_cast<double>(counts.first) / counts.second;
    for (const auto& [key, counts] : ans_topology)
        if (counts.second > 0)
            m.answer_by_topology[key] = static_cast<double>(counts.first) / counts.second;
    return m;
}

namespace {

json record_to_json(const EpisodeRecord& r) {
    json j;
    j["episode"] = r.episode;
    j["topology"] = topology_kind_name(r.topology);
    j["attack"] = attack_kind_name(r.attack);
    j["attacker"] = r.attacker ? json(*r.attacker) : json(nullptr);
    j["flagged"] = std::vector<AgentId>(r.detection.flagged.begin(), r.detection.flagged.end());
    json dev = json::object();
    for (const auto& [agent, value] : r.detection.deviation) dev[std::to_string(agent)] = value;
    j["deviations"] = dev;
    j["method"] = detection_method_name(r.detection.method);
    j["epsilon"] = r.detection.epsilon;
    j["final_correct"] = r.final_correct;
    j["final_decision"] = r.final_decision;
    j["judge_seed"] = r.judge_seed;
    j["quarantined_before"] = r.quarantined_before;
    return j;
}

}  // namespace

std::string CampaignReport::to_json() const {
    json j;
    j["version"] = kVersion;
    j["config"] = json::parse(spec.to_json());
    json eps = json::array();
    for (const auto& r : episodes) eps.push_back(record_to_json(r));
    j["episodes"] = eps;
    json m;
    m["episodes"] = metrics.episodes;
    m["attacked_episodes"] = metrics.attacked_episodes;
    m["monitor_accuracy"] =
        metrics.monitor_accuracy ? json(*metrics.monitor_accuracy) : json(nullptr);
    m["monitor_accuracy_lenient"] =
        metrics.monitor_accuracy_lenient ? json(*metrics.monitor_accuracy_lenient) : json(nullptr);
    m["answer_accuracy"] = metrics.answer_accuracy;
    m["monitor_by_attack"] = metrics.monitor_by_attack;
    m["monitor_by_topology"] = metrics.monitor_by_topology;
    m["answer_by_attack"] = metrics.answer_by_attack;
    m["answer_by_topology"] = metrics.answer_by_topology;
    j["metrics"] = m;
    return j.dump(2);
}

std::string CampaignReport::to_csv() const {
    std::ostringstream out;
    out << "episode,topology,attack,attacker,flagged,final_correct,method\n";
    for (const auto& r : episodes) {
        out << r.episode << ',' << topology_kind_name(r.topology) << ','
            << attack_kind_name(r.attack) << ',';
        if (r.attacker) out << *r.attacker;
        out << ',';
        bool first = true;
        for (AgentId a : r.detection.flagged) {
            if (!first) out << '|';
            out << a;
            first = false;
        }
        out << ',' << (r.final_correct ? "true" : "false") << ','
            << detection_method_name(r.detection.method) << "\n";
    }
    return out.str();
}

}  // namespace masmon

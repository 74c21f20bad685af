#include "masmon/transcript.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace masmon {

using nlohmann::json;

void Transcript::validate() const {
    if (events.empty()) throw Error(Errc::kEmptyTranscript, "transcript has no events");
    if (round_count < 1) throw Error(Errc::kTranscriptInvalid, "round_count < 1");

    std::set<AgentId> final_senders;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        std::ostringstream where;
        where << "event " << i << " (round " << e.round << ", sender " << e.sender << ")";
        if (e.round < 1 || e.round > round_count)
            throw Error(Errc::kTranscriptInvalid, where.str() + ": round outside 1..T");
        if (e.sender >= agent_count)
            throw Error(Errc::kTranscriptInvalid, where.str() + ": sender id out of range");
        for (AgentId r : e.receivers)
            if (r >= agent_count)
                throw Error(Errc::kTranscriptInvalid, where.str() + ": receiver id out of range");
        if (e.round == round_count) final_senders.insert(e.sender);
    }

    // final_answers must cover exactly the agents that produced a final-round
    // output.
    for (const auto& [agent, answer] : final_answers) {
        (void)answer;
        if (!final_senders.count(agent))
            throw Error(Errc::kTranscriptInvalid,
                        "final_answers lists agent " + std::to_string(agent) +
                            " which has no round-" + std::to_string(round_count) + " output");
    }
}

std::string majority_label(const std::vector<std::string>& votes) {
    std::map<std::string, int> tally;
    for (const auto& v : votes) ++tally[v];
    std::string best;
    int best_count = -1;
    for (const auto& [label, count] : tally) {
        if (count > best_count) {  // map iterates labels ascending, so the
            best = label;          // first max is the lexicographic tie-break
            best_count = count;
        }
    }
    return best;
}

namespace {

json event_to_json(const MessageEvent& e) {
    json j;
    j["episode_id"] = e.episode_id;
    j["round"] = e.round;
    j["sender"] = e.sender;
    j["receivers"] = e.receivers;
    j["content"] = e.content;
    j["stance"] = e.stance ? json(*e.stance) : json(nullptr);
    j["agrees_with_final"] = e.agrees_with_final ? json(*e.agrees_with_final) : json(nullptr);
    return j;
}

MessageEvent event_from_json(const json& j, int line_no) {
    auto fail = [&](const std::string& msg) {
        throw Error(Errc::kTranscriptInvalid, "line " + std::to_string(line_no) + ": " + msg);
    };
    MessageEvent e;
    if (!j.contains("round") || !j.contains("sender")) fail("event missing round/sender");
    e.episode_id = j.value("episode_id", std::string{});
    if (!j["round"].is_number_integer()) fail("round is not an integer");
    e.round = j["round"].get<int>();
    e.sender = j["sender"].get<AgentId>();
    if (j.contains("receivers") && !j["receivers"].is_null())
        e.receivers = j["receivers"].get<std::vector<AgentId>>();
    e.content = j.value("content", std::string{});
    if (j.contains("stance") && !j["stance"].is_null())
        e.stance = j["stance"].get<std::string>();
    if (j.contains("agrees_with_final") && !j["agrees_with_final"].is_null())
        e.agrees_with_final = j["agrees_with_final"].get<bool>();
    return e;
}

}  // namespace

Transcript read_transcript_jsonl(std::istream& in) {
    Transcript t;
    bool have_summary = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(Errc::kInputUnreadable,
                        "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.contains("final_decision") || j.contains("final_answers")) {
            if (have_summary)
                throw Error(Errc::kTranscriptInvalid,
                            "line " + std::to_string(line_no) + ": duplicate summary line");
            have_summary = true;
            try {
                if (j.contains("final_answers"))
                    for (const auto& [key, value] : j["final_answers"].items())
                        t.final_answers[static_cast<AgentId>(std::stoul(key))] =
                            value.get<std::string>();
            } catch (const std::exception& e) {
                throw Error(Errc::kTranscriptInvalid,
                            "line " + std::to_string(line_no) + ": bad final_answers: " + e.what());
            }
            if (j.contains("final_decision") && !j["final_decision"].is_null()) {
                t.final_decision = j["final_decision"].get<std::string>();
            } else {
                // Aggregation left implicit by the producer: majority vote
                // over the recorded final answers, smallest label on ties.
                std::vector<std::string> votes;
                for (const auto& [agent, label] : t.final_answers) {
                    (void)agent;
                    votes.push_back(label);
                }
                if (!votes.empty()) t.final_decision = majority_label(votes);
            }
            if (t.episode_id.empty()) t.episode_id = j.value("episode_id", std::string{});
            continue;
        }
        try {
            MessageEvent e = event_from_json(j, line_no);
            if (t.episode_id.empty()) t.episode_id = e.episode_id;
            t.events.push_back(std::move(e));
        } catch (const json::exception& e) {
            throw Error(Errc::kTranscriptInvalid,
                        "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (t.events.empty()) throw Error(Errc::kEmptyTranscript, "no event lines found");

    for (const auto& e : t.events) {
        t.round_count = std::max(t.round_count, e.round);
        t.agent_count = std::max(t.agent_count, e.sender + 1);
        for (AgentId r : e.receivers) t.agent_count = std::max(t.agent_count, r + 1);
    }

    // A missing summary line is not an error here: the graph can still be
    // built, and score initialization reports MissingFinalStance when the
    // answers are actually needed.
    t.validate();
    return t;
}

Transcript read_transcript_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::kInputUnreadable, "cannot open " + path);
    return read_transcript_jsonl(in);
}

void write_transcript_jsonl(const Transcript& t, std::ostream& out) {
    for (const auto& e : t.events) out << event_to_json(e).dump() << "\n";
    json summary;
    summary["episode_id"] = t.episode_id;
    summary["final_decision"] = t.final_decision;
    json answers = json::object();
    for (const auto& [agent, label] : t.final_answers) answers[std::to_string(agent)] = label;
    summary["final_answers"] = answers;
    out << summary.dump() << "\n";
}

void write_transcript_jsonl_file(const Transcript& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::kInputUnreadable, "cannot write " + path);
    write_transcript_jsonl(t, out);
}

}  // namespace masmon

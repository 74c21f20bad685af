#include "masmon/message_text.hpp"

#include <cctype>
#include <sstream>

namespace masmon {

namespace {

const std::string kRejectPrefix = "I reject the suggestion from agent ";

std::string rejection_clauses(const std::vector<AgentId>& rejected) {
    std::ostringstream s;
    for (AgentId a : rejected) s << " " << kRejectPrefix << a << ".";
    return s.str();
}

}  // namespace

std::string stance_message_text(const std::string& label, const std::vector<AgentId>& rejected) {
    return "I think the answer is " + label + "." + rejection_clauses(rejected);
}

std::string final_answer_text(const std::string& label, const std::vector<AgentId>& rejected) {
    return "My final answer is " + label + "." + rejection_clauses(rejected);
}

std::string refusal_text() {
    return "I must refuse to engage with this question; it does not look safe to answer.";
}

std::string persuasive_message_text(const std::string& label,
                                    const std::vector<AgentId>& rejected) {
    return "After rigorous analysis the answer is definitely " + label +
           "; every other option fails under scrutiny." + rejection_clauses(rejected);
}

std::string swap_label(const std::string& content, const std::string& old_label,
                       const std::string& new_label) {
    if (old_label.empty()) return content;
    auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    std::string out = content;
    std::size_t pos = 0;
    while ((pos = out.find(old_label, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_word(out[pos - 1]);
        std::size_t after = pos + old_label.size();
        bool right_ok = after >= out.size() || !is_word(out[after]);
        if (left_ok && right_ok) {  // whole labels only, not substrings of words
            out.replace(pos, old_label.size(), new_label);
            pos += new_label.size();
        } else {
            pos += 1;
        }
    }
    return out;
}

std::vector<AgentId> parse_rejected_agents(const std::string& content) {
    std::vector<AgentId> out;
    std::size_t pos = 0;
    while ((pos = content.find(kRejectPrefix, pos)) != std::string::npos) {
        pos += kRejectPrefix.size();
        std::size_t end = pos;
        while (end < content.size() && std::isdigit(static_cast<unsigned char>(content[end])))
            ++end;
        if (end > pos) out.push_back(static_cast<AgentId>(std::stoul(content.substr(pos, end - pos))));
        pos = end;
    }
    return out;
}

bool rejects_agent(const std::string& content, AgentId agent) {
    for (AgentId a : parse_rejected_agents(content))
        if (a == agent) return true;
    return false;
}

}  // namespace masmon

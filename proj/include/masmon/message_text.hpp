#pragma once

#include <string>
#include <vector>

#include "masmon/types.hpp"

namespace masmon {

// Fixed text protocol for simulated messages. The simulator only needs
// template text that carries a stance label plus explicit rejection clauses;
// the synthetic judge recovers both from the content alone, so a dumped
// transcript is self-contained.

std::string stance_message_text(const std::string& label,
                                const std::vector<AgentId>& rejected);
std::string final_answer_text(const std::string& label,
                              const std::vector<AgentId>& rejected);
std::string refusal_text();
std::string persuasive_message_text(const std::string& label,
                                    const std::vector<AgentId>& rejected);

// Replaces every occurrence of `old_label` in `content` with `new_label`.
std::string swap_label(const std::string& content, const std::string& old_label,
                       const std::string& new_label);

// True if `content` contains a rejection clause naming `agent`.
bool rejects_agent(const std::string& content, AgentId agent);

std::vector<AgentId> parse_rejected_agents(const std::string& content);

}  // namespace masmon

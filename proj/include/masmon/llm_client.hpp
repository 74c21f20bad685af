#pragma once

#include <string>

#include "masmon/judge.hpp"

namespace masmon {

// Minimal OpenAI-compatible chat-completion client. One user message in, the
// first choice's message content out. The API key is read from the
// environment variable named in the config; requests are retried with
// exponential backoff.
class ChatCompletionClient {
  public:
    explicit ChatCompletionClient(const JudgeConfig& cfg);

    // Throws kJudgeUnavailable once transport-level retries are exhausted.
    std::string complete(const std::string& prompt) const;

  private:
    std::string endpoint_;
    std::string model_;
    std::string api_key_;
    int max_retries_;
    int timeout_sec_;
};

// LLM-backed edge scoring: builds the score prompt per edge, queries the
// endpoint with at most `cfg.concurrency` requests in flight, and maps
// replies that stay unparseable after retries to the neutral sign.
SignedGraph score_all_edges_llm(const MasGraph& graph, const JudgeConfig& cfg);

}  // namespace masmon

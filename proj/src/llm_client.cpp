#include "masmon/llm_client.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace masmon {

using nlohmann::json;

namespace {

struct ParsedUrl {
    std::string scheme_host;  // e.g. http://127.0.0.1:8080
    std::string path;         // e.g. /v1/chat/completions
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    std::size_t path_start =
        scheme_end == std::string::npos ? url.find('/') : url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/v1/chat/completions"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

ChatCompletionClient::ChatCompletionClient(const JudgeConfig& cfg)
    : endpoint_(cfg.endpoint_url),
      model_(cfg.model_name),
      max_retries_(cfg.max_retries),
      timeout_sec_(cfg.request_timeout_sec) {
    if (const char* key = std::getenv(cfg.api_key_env_var.c_str())) api_key_ = key;
}

std::string ChatCompletionClient::complete(const std::string& prompt) const {
    ParsedUrl url = split_url(endpoint_);
    json body;
    body["model"] = model_;
    body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
        if (attempt > 0) {
            auto delay = std::chrono::milliseconds(50LL << std::min(attempt - 1, 5));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(url.scheme_host);
        client.set_connection_timeout(timeout_sec_, 0);
        client.set_read_timeout(timeout_sec_, 0);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto res = client.Post(url.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        try {
            json reply = json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            last_error = std::string("malformed completion: ") + e.what();
            continue;
        }
    }
    throw Error(Errc::kJudgeUnavailable, endpoint_ + " (" + last_error + ")");
}

SignedGraph score_all_edges_llm(const MasGraph& graph, const JudgeConfig& cfg) {
    SignedGraph out;
    out.graph = &graph;
    out.signs.resize(graph.edges.size(), Sign::kNeutral);
    if (graph.edges.empty()) return out;

    ChatCompletionClient client(cfg);
    std::atomic<std::uint32_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (true) {
            std::uint32_t i = next.fetch_add(1);
            if (i >= graph.edges.size() || stop.load()) return;
            const GraphEdge& e = graph.edges[i];
            const std::string& sender_message =
                out.graph->output_content[e.from].empty() ? "(empty)"
                                                          : out.graph->output_content[e.from];
            const std::string& receiver_output =
                out.graph->output_content[e.to].empty() ? "(empty)"
                                                        : out.graph->output_content[e.to];
            try {
                // Retry budget covers bad content as well as transport: an
                // unparseable grade is re-asked, and maps to neutral only
                // once the budget is spent.
                Sign sign = Sign::kNeutral;
                bool parsed = false;
                for (int attempt = 0; attempt <= cfg.max_retries && !parsed; ++attempt) {
                    std::string reply =
                        client.complete(build_score_prompt(sender_message, receiver_output));
                    ScoreParse p = try_parse_score(reply);
                    if (p.sign) {
                        sign = *p.sign;
                        parsed = true;
                    }
                }
                out.signs[i] = sign;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                stop.store(true);
                return;
            }
        }
    };

    int threads = std::max(1, std::min<int>(cfg.concurrency,
                                            static_cast<int>(graph.edges.size())));
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace masmon

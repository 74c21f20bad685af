#include <doctest.h>

#include <atomic>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "masmon/graph.hpp"
#include "masmon/judge.hpp"
#include "masmon/llm_client.hpp"
#include "masmon/message_text.hpp"

using namespace masmon;
using nlohmann::json;

namespace {

// Two agents exchanging in round 1, answering in round 2: 2 edges to judge.
Transcript tiny_transcript() {
    Transcript t;
    t.episode_id = "llm";
    t.agent_count = 2;
    t.round_count = 2;
    auto ev = [](int round, AgentId sender, std::vector<AgentId> recv, const char* stance,
                 std::string content) {
        MessageEvent e;
        e.episode_id = "llm";
        e.round = round;
        e.sender = sender;
        e.receivers = std::move(recv);
        e.stance = stance;
        e.content = std::move(content);
        return e;
    };
    t.events = {ev(1, 0, {1}, "A", stance_message_text("A", {})),
                ev(1, 1, {0}, "B", stance_message_text("B", {})),
                ev(2, 0, {}, "A", final_answer_text("A", {1})),
                ev(2, 1, {}, "A", final_answer_text("A", {}))};
    t.final_answers = {{0, "A"}, {1, "A"}};
    t.final_decision = "A";
    return t;
}

struct MockServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit MockServer(httplib::Server::Handler handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~MockServer() {
        server.stop();
        thread.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

json completion_reply(const std::string& content) {
    return json{{"choices", json::array({json{{"message", json{{"content", content}}}}})}};
}

JudgeConfig llm_config(const std::string& url) {
    JudgeConfig cfg;
    cfg.kind = JudgeKind::kLlm;
    cfg.endpoint_url = url + "/v1/chat/completions";
    cfg.model_name = "scorer-1";
    cfg.max_retries = 2;
    cfg.request_timeout_sec = 5;
    cfg.concurrency = 2;
    return cfg;
}

}  // namespace

TEST_CASE("llm judge scores edges over the chat protocol") {
    std::atomic<int> requests{0};
    MockServer mock([&](const httplib::Request& req, httplib::Response& res) {
        ++requests;
        json body = json::parse(req.body);
        CHECK(body["model"] == "scorer-1");
        std::string prompt = body["messages"][0]["content"];
        // the advisor slot carries the receiver's own output
        std::string reply = prompt.find("I reject the suggestion from agent") != std::string::npos
                                ? "[score] -1"
                                : "[score] 1";
        res.set_content(completion_reply(reply).dump(), "application/json");
    });

    Transcript t = tiny_transcript();
    MasGraph g = build_graph(t);
    SignedGraph sg = score_all_edges(g, llm_config(mock.url()));
    REQUIRE(sg.signs.size() == 2);
    // edge B1 -> A2 lands on the output that rejects agent 1
    std::uint32_t b1 = g.find_node(1, 1);
    for (std::size_t i = 0; i < g.edge_count(); ++i)
        CHECK(sg.signs[i] == (g.edges[i].from == b1 ? Sign::kNegative : Sign::kPositive));
    CHECK(requests.load() == 2);
}

TEST_CASE("transient failures are retried, persistent garbage maps to neutral") {
    std::atomic<int> requests{0};
    MockServer mock([&](const httplib::Request&, httplib::Response& res) {
        int n = ++requests;
        if (n == 1) {
            res.status = 500;
            return;
        }
        if (n == 2) {
            res.set_content(completion_reply("the grade is one").dump(), "application/json");
            return;
        }
        res.set_content(completion_reply("[score] 0").dump(), "application/json");
    });

    MasGraph g = build_graph(tiny_transcript());

    JudgeConfig cfg = llm_config(mock.url());
    cfg.concurrency = 1;  // deterministic request order
    SignedGraph sg = score_all_edges(g, cfg);
    REQUIRE(sg.signs.size() == 2);
    // first edge: 500 then unparseable then parsed "[score] 0"
    CHECK(sg.signs[0] == Sign::kNeutral);
    CHECK(requests.load() >= 3);
}

TEST_CASE("unreachable endpoint raises JudgeUnavailable") {
    Transcript t = tiny_transcript();
    MasGraph g = build_graph(t);
    JudgeConfig cfg = llm_config("http://127.0.0.1:9");  // discard port, nothing listens
    cfg.max_retries = 1;
    cfg.request_timeout_sec = 1;
    try {
        score_all_edges(g, cfg);
        FAIL("expected JudgeUnavailable");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::kJudgeUnavailable);
    }
}

TEST_CASE("api key is forwarded as a bearer token") {
    std::string seen_auth;
    MockServer mock([&](const httplib::Request& req, httplib::Response& res) {
        if (req.has_header("Authorization")) seen_auth = req.get_header_value("Authorization");
        res.set_content(completion_reply("[score] 1").dump(), "application/json");
    });
    setenv("MASMON_TEST_KEY", "sk-test-123", 1);
    JudgeConfig cfg = llm_config(mock.url());
    cfg.api_key_env_var = "MASMON_TEST_KEY";
    ChatCompletionClient client(cfg);
    client.complete("hello");
    CHECK(seen_auth == "Bearer sk-test-123");
    unsetenv("MASMON_TEST_KEY");
}

#include "lexgraph/llm.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lexgraph/parsers.hpp"
#include "lexgraph/prompts.hpp"

namespace {

using namespace lexgraph;

TEST(PromptRender, SubstitutesSlots) {
    const RenderedPrompt prompt = render_prompt(
        TemplateId::auditor_item, {{"law_item", "Whoever steals..."},
                                   {"related", "none"},
                                   {"element", "Did the defendant take property?"},
                                   {"case", "stole a bike"}});
    EXPECT_EQ(prompt.user,
              "law: Whoever steals..., related: none\n"
              "element: Did the defendant take property?, case: stole a bike");
    EXPECT_NE(prompt.system.find("<answer>true</answer>"), std::string::npos);
}

TEST(PromptRender, UnboundSlotFails) {
    EXPECT_THROW(render_prompt(TemplateId::auditor_item, {{"law_item", "x"}}),
                 ValidationError);
}

TEST(PromptRender, UnknownSlotFails) {
    EXPECT_THROW(render_prompt(TemplateId::charge_prejudge,
                               {{"case", "x"}, {"extra", "y"}}),
                 ValidationError);
}

TEST(PromptRender, FingerprintStableAndSensitive) {
    const auto a = render_prompt(TemplateId::charge_prejudge, {{"case", "facts A"}});
    const auto b = render_prompt(TemplateId::charge_prejudge, {{"case", "facts A"}});
    const auto c = render_prompt(TemplateId::charge_prejudge, {{"case", "facts B"}});
    EXPECT_EQ(prompt_fingerprint(a), prompt_fingerprint(b));
    EXPECT_NE(prompt_fingerprint(a), prompt_fingerprint(c));
    EXPECT_EQ(prompt_fingerprint(a).size(), 16u);
}

TEST(ScriptedBackend, ReplaysRecordedPair) {
    const auto prompt = render_prompt(TemplateId::charge_prejudge, {{"case", "stole a bike"}});
    ScriptedBackend backend;
    backend.add(prompt, "['Theft']");
    EXPECT_EQ(backend.complete(prompt), "['Theft']");
}

TEST(ScriptedBackend, UnknownFingerprintFailsLoudlyNamingIt) {
    const auto prompt = render_prompt(TemplateId::charge_prejudge, {{"case", "unseen"}});
    ScriptedBackend backend;
    try {
        backend.complete(prompt);
        FAIL() << "expected BackendError";
    } catch (const BackendError& e) {
        EXPECT_NE(std::string(e.what()).find(prompt_fingerprint(prompt)), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("charge_prejudge"), std::string::npos);
    }
}

TEST(ScriptedBackend, SaveLoadRoundTrip) {
    const auto prompt_a = render_prompt(TemplateId::charge_prejudge, {{"case", "a"}});
    const auto prompt_b = render_prompt(TemplateId::verdict,
                                        {{"context_list", "[1] x"}, {"case_description", "b"}});
    ScriptedBackend backend;
    backend.add(prompt_a, "['Theft']");
    backend.add(prompt_b, "Legal Analysis: [1]. Final Verdict: guilty.");
    const auto path = std::filesystem::temp_directory_path() / "lexgraph_script_test.jsonl";
    backend.save(path);
    ScriptedBackend loaded = ScriptedBackend::from_file(path);
    EXPECT_EQ(loaded.size(), 2u);
    EXPECT_EQ(loaded.complete(prompt_a), "['Theft']");
    EXPECT_EQ(loaded.complete(prompt_b), "Legal Analysis: [1]. Final Verdict: guilty.");
    std::filesystem::remove(path);
}

TEST(RecordingBackend, CapturesEveryExchange) {
    CallbackBackend inner([](const RenderedPrompt&) { return std::string("[]"); });
    RecordingBackend recorder(inner);
    const auto prompt = render_prompt(TemplateId::charge_prejudge, {{"case", "x"}});
    recorder.complete(prompt);
    EXPECT_EQ(recorder.script().size(), 1u);
    ScriptedBackend replay = recorder.script();
    EXPECT_EQ(replay.complete(prompt), "[]");
}

TEST(Gateway, LedgerRecordsEveryCallOnce) {
    CallbackBackend backend([](const RenderedPrompt&) { return std::string("reply text"); });
    Gateway gateway(backend);
    const auto prompt = render_prompt(TemplateId::charge_prejudge, {{"case", "one two three"}});
    gateway.complete(prompt, "researcher");
    gateway.complete(prompt, "researcher");
    const auto calls = gateway.ledger().calls();
    ASSERT_EQ(calls.size(), 2u);
    EXPECT_EQ(calls[0].template_name, "charge_prejudge");
    EXPECT_EQ(calls[0].stage, "researcher");
    EXPECT_GT(calls[0].prompt_tokens, 0u);
    EXPECT_EQ(calls[0].completion_tokens, 2u);

    // Aggregates reconcile with per-call entries.
    const UsageTotals totals = gateway.ledger().totals();
    EXPECT_EQ(totals.calls, 2u);
    std::size_t sum = 0;
    for (const auto& call : calls) sum += call.prompt_tokens + call.completion_tokens;
    std::size_t by_template_sum = 0;
    for (const auto& [_, t] : gateway.ledger().by_template())
        by_template_sum += t.prompt_tokens + t.completion_tokens;
    std::size_t by_stage_sum = 0;
    for (const auto& [_, t] : gateway.ledger().by_stage())
        by_stage_sum += t.prompt_tokens + t.completion_tokens;
    EXPECT_EQ(sum, totals.prompt_tokens + totals.completion_tokens);
    EXPECT_EQ(sum, by_template_sum);
    EXPECT_EQ(sum, by_stage_sum);
}

TEST(Gateway, RetriesTransportErrorsWithCount) {
    std::atomic<int> attempts{0};
    CallbackBackend backend([&](const RenderedPrompt&) -> std::string {
        if (++attempts <= 2) throw TransportError("flaky");
        return "ok";
    });
    RetryPolicy retry;
    retry.max_transport_retries = 2;
    retry.base_delay = std::chrono::milliseconds(1);
    Gateway gateway(backend, retry);
    const auto prompt = render_prompt(TemplateId::charge_prejudge, {{"case", "x"}});
    EXPECT_EQ(gateway.complete(prompt, "test"), "ok");
    EXPECT_EQ(attempts.load(), 3);
    ASSERT_EQ(gateway.ledger().calls().size(), 1u);
    EXPECT_EQ(gateway.ledger().calls()[0].retry_count, 2);
}

TEST(Gateway, ExhaustedRetriesBecomeBackendError) {
    CallbackBackend backend([](const RenderedPrompt&) -> std::string {
        throw TransportError("down");
    });
    RetryPolicy retry;
    retry.max_transport_retries = 1;
    retry.base_delay = std::chrono::milliseconds(1);
    Gateway gateway(backend, retry);
    const auto prompt = render_prompt(TemplateId::charge_prejudge, {{"case", "x"}});
    EXPECT_THROW(gateway.complete(prompt, "test"), BackendError);
}

TEST(Gateway, ReAskAppendsFormatReminderOnce) {
    std::vector<std::string> seen;
    CallbackBackend backend([&](const RenderedPrompt& prompt) -> std::string {
        seen.push_back(prompt.user);
        return seen.size() == 1 ? "garbage" : "['Theft']";
    });
    Gateway gateway(backend);
    const auto prompt = render_prompt(TemplateId::charge_prejudge, {{"case", "x"}});
    const auto charges = gateway.complete_parsed(
        prompt, "test", [](const std::string& text) { return parse_charge_list(text); },
        "Reply with a Python list.");
    EXPECT_EQ(charges, std::vector<std::string>{"Theft"});
    ASSERT_EQ(seen.size(), 2u);
    EXPECT_NE(seen[1].find("Reply with a Python list."), std::string::npos);
    EXPECT_NE(seen[1].find(seen[0]), std::string::npos);  // original retained
}

TEST(Gateway, SecondParseFailurePropagates) {
    CallbackBackend backend([](const RenderedPrompt&) { return std::string("junk"); });
    Gateway gateway(backend);
    const auto prompt = render_prompt(TemplateId::charge_prejudge, {{"case", "x"}});
    EXPECT_THROW(gateway.complete_parsed(
                     prompt, "test",
                     [](const std::string& text) { return parse_charge_list(text); }, "fix it"),
                 ParseError);
}

// The OpenAI-compatible chat wire shape, exercised against a live local stub:
// 500 twice, then 200 -> success with retry_count = 2.
TEST(HttpChatBackend, RetriesServerErrorsThenSucceeds) {
    httplib::Server server;
    std::atomic<int> hits{0};
    nlohmann::json seen_body;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                            httplib::Response& res) {
        if (++hits <= 2) {
            res.status = 500;
            return;
        }
        seen_body = nlohmann::json::parse(req.body);
        res.set_content(
            R"({"choices":[{"message":{"role":"assistant","content":"['Theft']"}}]})",
            "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpChatBackend::Options opts;
    opts.base_url = "http://127.0.0.1:" + std::to_string(port);
    opts.model = "test-model";
    opts.api_key = "sk-test";
    HttpChatBackend backend(opts);
    RetryPolicy retry;
    retry.base_delay = std::chrono::milliseconds(1);
    Gateway gateway(backend, retry);

    const auto prompt = render_prompt(TemplateId::charge_prejudge, {{"case", "stole a bike"}});
    EXPECT_EQ(gateway.complete(prompt, "researcher"), "['Theft']");
    EXPECT_EQ(gateway.ledger().calls()[0].retry_count, 2);

    EXPECT_EQ(seen_body["model"], "test-model");
    EXPECT_EQ(seen_body["temperature"], 0);
    ASSERT_EQ(seen_body["messages"].size(), 2u);
    EXPECT_EQ(seen_body["messages"][0]["role"], "system");
    EXPECT_EQ(seen_body["messages"][1]["role"], "user");
    EXPECT_NE(seen_body["messages"][1]["content"].get<std::string>().find("stole a bike"),
              std::string::npos);

    server.stop();
    thread.join();
}

TEST(HttpChatBackend, ClientErrorIsNotRetried) {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions",
                [&](const httplib::Request&, httplib::Response& res) {
                    ++hits;
                    res.status = 401;
                });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpChatBackend::Options opts;
    opts.base_url = "http://127.0.0.1:" + std::to_string(port);
    opts.model = "test-model";
    HttpChatBackend backend(opts);
    Gateway gateway(backend);
    const auto prompt = render_prompt(TemplateId::charge_prejudge, {{"case", "x"}});
    EXPECT_THROW(gateway.complete(prompt, "test"), BackendError);
    EXPECT_EQ(hits.load(), 1);

    server.stop();
    thread.join();
}

}  // namespace

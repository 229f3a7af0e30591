#include "doctest.h"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "tabench/backend.hpp"
#include "tabench/strings.hpp"
#include "test_util.hpp"

using namespace tabench;
using nlohmann::json;

namespace {

PromptBundle bundle_of(const std::string& system, const std::string& user) {
    PromptBundle b;
    b.system_text = system;
    b.user_text = user;
    b.template_id = "test";
    b.template_version = "v1";
    return b;
}

ModelSpec spec_named(const std::string& name) { return ModelSpec{name, false, 1024, "test"}; }

} // namespace

TEST_CASE("scripted backend pops replies in order and reports exhaustion") {
    auto backend = script({"X", "Y"});
    auto b = bundle_of("s", "u");
    auto spec = spec_named("m");

    auto first = backend->complete(spec, b, std::chrono::seconds(1), {});
    REQUIRE(first.has_value());
    CHECK(first.value().output_text == "X");
    CHECK(first.value().tokens_estimated);
    CHECK(first.value().tokens.output == estimate_tokens("X"));
    CHECK(!first.value().tokens.thinking.has_value());

    CHECK(backend->complete(spec, b, std::chrono::seconds(1), {}).value().output_text == "Y");

    auto exhausted = backend->complete(spec, b, std::chrono::seconds(1), {});
    REQUIRE(!exhausted.has_value());
    CHECK(exhausted.error().kind == BackendError::Kind::ScriptExhausted);
}

TEST_CASE("scripted thinking replies populate the thinking channel") {
    auto backend = std::make_shared<ScriptedBackend>(
        std::vector<ScriptedBackend::Reply>{{"answer", "inner monologue"}});
    auto reply = backend->complete(spec_named("m"), bundle_of("s", "u"), std::chrono::seconds(1), {});
    REQUIRE(reply.has_value());
    CHECK(reply.value().thinking_text == "inner monologue");
    CHECK(reply.value().tokens.thinking == estimate_tokens("inner monologue"));
}

TEST_CASE("record then replay is byte-identical and keyed by context") {
    std::string dir = testutil::temp_dir("cassette");
    std::string cassette = dir + "/c.jsonl";
    auto spec = spec_named("m");
    auto b = bundle_of("system", "user");

    {
        auto recorded = record_wrap(script({"first", "second"}), cassette);
        // The same prompt twice, distinguished only by the context tag.
        auto r1 = recorded->complete(spec, b, std::chrono::seconds(1), {"trial=0"});
        auto r2 = recorded->complete(spec, b, std::chrono::seconds(1), {"trial=1"});
        REQUIRE(r1.has_value());
        REQUIRE(r2.has_value());
    }

    ReplayBackend replay(cassette);
    auto r1 = replay.complete(spec, b, std::chrono::seconds(1), {"trial=0"});
    auto r2 = replay.complete(spec, b, std::chrono::seconds(1), {"trial=1"});
    REQUIRE(r1.has_value());
    REQUIRE(r2.has_value());
    CHECK(r1.value().output_text == "first");
    CHECK(r2.value().output_text == "second");
    CHECK(r1.value().tokens.prompt == estimate_tokens("system") + estimate_tokens("user"));

    // Replay is repeatable.
    CHECK(replay.complete(spec, b, std::chrono::seconds(1), {"trial=0"}).value().output_text ==
          "first");

    auto miss = replay.complete(spec, b, std::chrono::seconds(1), {"trial=9"});
    REQUIRE(!miss.has_value());
    CHECK(miss.error().kind == BackendError::Kind::CassetteMiss);

    auto other_model = replay.complete(spec_named("other"), b, std::chrono::seconds(1), {"trial=0"});
    CHECK(!other_model.has_value());

    std::filesystem::remove_all(dir);
}

TEST_CASE("chat completion parsing maps usage channels per adapter") {
    json body = {
        {"choices",
         json::array({{{"message", {{"content", "hello"}, {"reasoning_content", "hmm"}}},
                       {"finish_reason", "stop"}}})},
        {"usage",
         {{"prompt_tokens", 11},
          {"completion_tokens", 40},
          {"completion_tokens_details", {{"reasoning_tokens", 30}}}}}};
    ModelReply reply = parse_chat_completion(body, "deepseek");
    CHECK(reply.output_text == "hello");
    CHECK(reply.thinking_text == "hmm");
    CHECK(reply.tokens.prompt == 11);
    CHECK(reply.tokens.output == 10); // completion minus reasoning
    CHECK(reply.tokens.thinking == 30);
    CHECK(!reply.truncated);
    CHECK(!reply.tokens_estimated);

    json plain = {{"choices", json::array({{{"message", {{"content", "hi"}}},
                                            {"finish_reason", "length"}}})},
                  {"usage", {{"prompt_tokens", 5}, {"completion_tokens", 7}}}};
    ModelReply r2 = parse_chat_completion(plain, "openai");
    CHECK(r2.tokens.output == 7);
    CHECK(!r2.tokens.thinking.has_value()); // absent, never zero
    CHECK(r2.truncated);

    json no_usage = {{"choices", json::array({{{"message", {{"content", "abcd"}}}}})}};
    ModelReply r3 = parse_chat_completion(no_usage, "openai");
    CHECK(r3.tokens_estimated);
    CHECK(r3.tokens.output == 1);
}

TEST_CASE("live backend against a local chat-completions server") {
    std::atomic<int> hits{0};
    std::atomic<int> fail_first{0};
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        if (fail_first.fetch_sub(1) > 0) {
            res.status = 503;
            res.set_content("overloaded", "text/plain");
            return;
        }
        json req_body = json::parse(req.body);
        REQUIRE(req_body.at("messages").size() == 2);
        CHECK(req.get_header_value("Authorization") == "Bearer test-key");
        json body = {{"choices", json::array({{{"message",
                                                {{"content", "reply to " +
                                                                 req_body.at("model")
                                                                     .get<std::string>()}}},
                                               {"finish_reason", "stop"}}})},
                     {"usage", {{"prompt_tokens", 3}, {"completion_tokens", 4}}}};
        res.set_content(body.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    while (!server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(5));

    EndpointProfile profile;
    profile.base_url = "http://127.0.0.1:" + std::to_string(port);
    profile.api_key_env = "TABENCH_TEST_KEY";
    profile.max_retries = 2;

    auto spec = spec_named("test-model");
    auto bundle = bundle_of("sys", "usr");

    SUBCASE("missing credential fails before any network I/O") {
        unsetenv("TABENCH_TEST_KEY");
        LiveBackend backend(profile);
        auto reply = backend.complete(spec, bundle, std::chrono::seconds(5), {});
        REQUIRE(!reply.has_value());
        CHECK(reply.error().kind == BackendError::Kind::AuthMissing);
        CHECK(hits.load() == 0);
    }

    SUBCASE("success path maps the reply") {
        setenv("TABENCH_TEST_KEY", "test-key", 1);
        LiveBackend backend(profile);
        auto reply = backend.complete(spec, bundle, std::chrono::seconds(5), {});
        REQUIRE(reply.has_value());
        CHECK(reply.value().output_text == "reply to test-model");
        CHECK(reply.value().tokens.prompt == 3);
        CHECK(reply.value().tokens.output == 4);
        CHECK(hits.load() == 1);
    }

    SUBCASE("transient 5xx retries with backoff then succeeds") {
        setenv("TABENCH_TEST_KEY", "test-key", 1);
        fail_first = 1;
        LiveBackend backend(profile);
        auto reply = backend.complete(spec, bundle, std::chrono::seconds(20), {});
        REQUIRE(reply.has_value());
        CHECK(hits.load() == 2);
    }

    SUBCASE("non-retryable provider error surfaces the status") {
        setenv("TABENCH_TEST_KEY", "test-key", 1);
        httplib::Server bad;
        bad.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
            res.status = 400;
            res.set_content("bad request", "text/plain");
        });
        int bad_port = bad.bind_to_any_port("127.0.0.1");
        std::thread bad_thread([&] { bad.listen_after_bind(); });
        while (!bad.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(5));
        EndpointProfile p2 = profile;
        p2.base_url = "http://127.0.0.1:" + std::to_string(bad_port);
        LiveBackend backend(p2);
        auto reply = backend.complete(spec, bundle, std::chrono::seconds(5), {});
        REQUIRE(!reply.has_value());
        CHECK(reply.error().kind == BackendError::Kind::Provider);
        CHECK(reply.error().status == 400);
        bad.stop();
        bad_thread.join();
    }

    SUBCASE("transport failure exhausts retries") {
        setenv("TABENCH_TEST_KEY", "test-key", 1);
        EndpointProfile p2 = profile;
        p2.base_url = "http://127.0.0.1:1"; // nothing listens here
        p2.max_retries = 1;
        LiveBackend backend(p2);
        auto reply = backend.complete(spec, bundle, std::chrono::seconds(5), {});
        REQUIRE(!reply.has_value());
        CHECK(reply.error().kind == BackendError::Kind::Transport);
    }

    server.stop();
    server_thread.join();
}

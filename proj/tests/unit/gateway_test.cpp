#include <memory>
#include <string>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "common/error.hpp"
#include "gateway/gateway.hpp"
#include "gateway/live_backend.hpp"
#include "gateway/prompt_template.hpp"
#include "gateway/scripted_backend.hpp"
#include "test_support.hpp"

using namespace part;
using namespace part::gateway;
using part::testing::ScriptedGateway;

namespace {

// Minimal chat-completions server that records the last request body.
class FakeLlm {
public:
    explicit FakeLlm(std::string reply, int status = 200) : reply_(std::move(reply)), status_(status)
    {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard lock(mutex_);
                last_body_ = req.body;
                last_auth_ = req.get_header_value("Authorization");
            }
            res.status = status_;
            nlohmann::json body = {{"choices", {{{"message", {{"role", "assistant"}, {"content", reply_}}}}}}};
            res.set_content(body.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeLlm()
    {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
    nlohmann::json last_body() const
    {
        std::lock_guard lock(mutex_);
        return nlohmann::json::parse(last_body_);
    }
    std::string last_auth() const
    {
        std::lock_guard lock(mutex_);
        return last_auth_;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::string reply_;
    int status_;
    mutable std::mutex mutex_;
    std::string last_body_;
    std::string last_auth_;
};

CompletionRequest generator_request(const std::string& message)
{
    CompletionRequest req;
    req.template_id = TemplateId::generator;
    req.bindings = {{"profile", "- hiking: alpine"}, {"context", "user: " + message}, {"summary", ""}, {"message", message}};
    return req;
}

}  // namespace

TEST(PromptTemplate, RendersPlaceholdersAndEscapedBraces)
{
    PromptTemplate t(TemplateId::summarizer, "Q={query} {{literal}} N={notes} {not a placeholder");
    EXPECT_EQ(t.render({{"query", "tea"}, {"notes", "[d1] x"}}), "Q=tea {literal} N=[d1] x {not a placeholder");
}

TEST(PromptTemplate, MissingBindingThrowsFirstAlphabetically)
{
    PromptTemplate t(TemplateId::summarizer, "{query} {notes}");
    try {
        t.render({});
        FAIL();
    } catch (const MissingPlaceholder& e) {
        EXPECT_EQ(e.name(), "notes");
    }
}

TEST(PromptTemplate, BodyMustContainRequiredPlaceholders)
{
    EXPECT_THROW(PromptTemplate(TemplateId::refiner, "no placeholders here"), Error);
}

TEST(TemplateRegistry, DefaultsCoverEveryTemplate)
{
    TemplateRegistry reg;
    for (auto id : kAllTemplates) {
        const auto& t = reg.get(id);
        for (const auto& name : required_placeholders(id)) EXPECT_TRUE(t.placeholders().count(name)) << to_string(id);
        EXPECT_TRUE(t.placeholders().count(fixture_key_binding(id))) << to_string(id);
    }
}

TEST(TemplateRegistry, DirectoryOverridesPerId)
{
    part::testing::TempDir dir;
    part::testing::write_file(dir / "summarizer.txt", "custom {query} / {notes}");
    const auto reg = TemplateRegistry::from_directory(dir.path());
    EXPECT_EQ(reg.get(TemplateId::summarizer).body(), "custom {query} / {notes}");
    EXPECT_EQ(reg.get(TemplateId::refiner).body(), TemplateRegistry{}.get(TemplateId::refiner).body());
}

TEST(TemplateId, NamesRoundTrip)
{
    for (auto id : kAllTemplates) EXPECT_EQ(parse_template_id(to_string(id)), id);
    EXPECT_FALSE(parse_template_id("nope"));
}

TEST(ScriptedBackend, LookupOrderScopeKeyThenKeyThenWildcard)
{
    ScriptedGateway g("generator\tcase1|hello\tscoped\n"
                      "generator\thello\tplain\n"
                      "generator\t*\tany\n");
    auto req = generator_request("Hello");
    EXPECT_EQ(g.gw.complete(req).text, "plain");
    req.fixture_scopes = {"case1"};
    EXPECT_EQ(g.gw.complete(req).text, "scoped");
    req.fixture_scopes = {"case2", "case1"};
    EXPECT_EQ(g.gw.complete(req).text, "scoped");
    EXPECT_EQ(g.gw.complete(generator_request("something else")).text, "any");
}

TEST(ScriptedBackend, KeysAreNormalized)
{
    ScriptedGateway g("generator\t  HELLO   World \tok\n");
    EXPECT_EQ(g.gw.complete(generator_request("hello world")).text, "ok");
}

TEST(ScriptedBackend, EscapesInResponses)
{
    ScriptedGateway g("# comment\n\nmemory_extractor\thi\ttopic: a | detail: b\\ntopic: c | detail: d\\\\\n");
    CompletionRequest req;
    req.template_id = TemplateId::memory_extractor;
    req.bindings = {{"profile", ""}, {"context", ""}, {"message", "hi"}};
    EXPECT_EQ(g.gw.complete(req).text, "topic: a | detail: b\ntopic: c | detail: d\\");
}

TEST(ScriptedBackend, MissRaisesFixtureMiss)
{
    ScriptedGateway g;
    try {
        g.gw.complete(generator_request("hello"));
        FAIL();
    } catch (const FixtureMiss& e) {
        EXPECT_EQ(e.template_id(), "generator");
        EXPECT_EQ(e.code(), ErrorCode::fixture_miss);
    }
}

TEST(ScriptedBackend, MalformedLineRejected)
{
    EXPECT_THROW(ScriptedBackend::from_string("generator only-two-fields\n"), Error);
    EXPECT_THROW(ScriptedBackend::from_string("bogus\tkey\tvalue\n"), Error);
}

TEST(Gateway, BlankCompletionIsAnError)
{
    ScriptedGateway g("generator\thello\t   \n");
    try {
        g.gw.complete(generator_request("hello"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_completion);
    }
}

TEST(Gateway, RejectsOutOfRangeTemperature)
{
    ScriptedGateway g("generator\t*\tx\n");
    auto req = generator_request("hello");
    req.temperature = 2.5;
    EXPECT_THROW(g.gw.complete(req), Error);
}

TEST(Gateway, RoutesPerTemplate)
{
    auto judge = std::make_shared<ScriptedBackend>(ScriptedBackend::from_string("judge_retrieval\t*\tPASS\n"));
    ScriptedGateway g("generator\t*\tx\n");
    g.gw.route(TemplateId::judge_retrieval, judge);
    CompletionRequest req;
    req.template_id = TemplateId::judge_retrieval;
    req.bindings = {{"context", ""}, {"query", "q"}, {"note", "n"}, {"note_id", "n1"}};
    EXPECT_EQ(g.gw.complete(req).text, "PASS");
    EXPECT_TRUE(g.gw.has_backend(TemplateId::refiner));
}

TEST(LiveBackend, DefaultTemperatureIsPointNine)
{
    EXPECT_DOUBLE_EQ(CompletionRequest{}.temperature, 0.9);
    FakeLlm fake("Sure, Dune 2 is worth it.");
    auto live = std::make_shared<LiveBackend>(LiveBackendSettings{fake.url(), "secret", "m1"});
    Gateway gw(TemplateRegistry{}, live);
    const auto result = gw.complete(generator_request("thoughts on Dune 2?"));
    EXPECT_EQ(result.text, "Sure, Dune 2 is worth it.");
    const auto body = fake.last_body();
    EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.9);
    EXPECT_EQ(body["model"], "m1");
    EXPECT_EQ(body["max_tokens"], 512);
    EXPECT_NE(body["messages"][0]["content"].get<std::string>().find("thoughts on Dune 2?"), std::string::npos);
    EXPECT_EQ(fake.last_auth(), "Bearer secret");
}

TEST(LiveBackend, NonSuccessStatusIsRejected)
{
    FakeLlm fake("nope", 503);
    auto live = std::make_shared<LiveBackend>(LiveBackendSettings{fake.url()});
    Gateway gw(TemplateRegistry{}, live);
    try {
        gw.complete(generator_request("hi"));
        FAIL();
    } catch (const BackendRejected& e) {
        EXPECT_EQ(e.status(), 503);
    }
}

TEST(LiveBackend, UnreachableEndpoint)
{
    LiveBackendSettings s{"http://127.0.0.1:1/v1/chat/completions"};
    s.timeout = std::chrono::seconds(2);
    Gateway gw(TemplateRegistry{}, std::make_shared<LiveBackend>(s));
    try {
        gw.complete(generator_request("hi"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::backend_unreachable);
    }
}

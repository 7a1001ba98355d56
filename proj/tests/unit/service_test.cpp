#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "common/error.hpp"
#include "persistence/codec.hpp"
#include "service/engine.hpp"
#include "service/http_server.hpp"
#include "test_support.hpp"

using namespace part;
using namespace part::service;
using nlohmann::json;
using part::testing::TempDir;
using part::testing::write_file;

namespace {

const char* kCorpus =
    R"({"note_id": "n1", "title": "Alpine trails", "body": "alpine hiking trails with larches", "tags": ["hiking"]}
{"note_id": "n2", "title": "Hut treks", "body": "hut to hut hiking", "tags": ["hiking"]}
{"note_id": "n3", "title": "Dune 2 review", "body": "Dune Part Two review", "tags": ["film"]}
{"note_id": "n4", "title": "Dune 2 box office", "body": "Dune Part Two box office", "tags": ["film"]}
)";

const char* kFixtures =
    "interest_query\thiking\talpine hiking trails\n"
    "summarizer\t*\tDigest [n1].\n"
    "greeting_generator\t*\tLarches are gold on the alpine trails. Going up this autumn?\n"
    "refiner\tWhat about Dune 2?\tintent=explicit_retrieval; query=Dune Part Two; reason=film\n"
    "refiner\t*\tintent=natural_transition; query=; reason=chat\n"
    "generator\t*\tTell me more.\n"
    "memory_extractor\t*\tNONE\n";

struct ScriptedEngine {
    TempDir dir;
    std::unique_ptr<Engine> engine;

    ScriptedEngine(bool with_store = false)
    {
        write_file(dir / "corpus.jsonl", kCorpus);
        write_file(dir / "fixtures.tsv", kFixtures);
        EngineConfig cfg;
        cfg.fixtures = dir / "fixtures.tsv";
        cfg.corpus = dir / "corpus.jsonl";
        cfg.deterministic = true;
        if (with_store) cfg.store_dir = dir / "store";
        engine = std::make_unique<Engine>(cfg);
        engine->store().store(UserProfile{"hiker", {{"hiking", "loves alpine trails", EntrySource::manual, 0, 1.0}}, 1});
    }
};

// Chat-completions fake whose replies block while the prompt contains "SLOW"
// until release() is called.
class GatedLlm {
public:
    GatedLlm()
    {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const auto body = json::parse(req.body);
            const std::string prompt = body["messages"][0]["content"].get<std::string>();
            if (prompt.find("SLOW") != std::string::npos) {
                std::unique_lock lock(mutex_);
                ++blocked_;
                cv_.notify_all();
                cv_.wait(lock, [this] { return released_; });
            }
            json reply = {{"choices", {{{"message", {{"content", "intent=natural_transition; query=; reason=x"}}}}}}};
            res.set_content(reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~GatedLlm()
    {
        release();
        server_.stop();
        thread_.join();
    }
    void wait_blocked()
    {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return blocked_ > 0; });
    }
    void release()
    {
        std::lock_guard lock(mutex_);
        released_ = true;
        cv_.notify_all();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::mutex mutex_;
    std::condition_variable cv_;
    int blocked_ = 0;
    bool released_ = false;
};

EnvLookup fake_env(std::map<std::string, std::string> vars)
{
    return [vars](const std::string& name) -> std::optional<std::string> {
        const auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

}  // namespace

TEST(EngineConfig, Defaults)
{
    const EngineConfig c;
    EXPECT_EQ(c.backend, "scripted");
    EXPECT_EQ(c.pipeline.k, 5u);
    EXPECT_DOUBLE_EQ(c.pipeline.generator_temperature, 0.9);
    EXPECT_FALSE(c.deterministic);
}

TEST(EngineConfig, JsonOverridesEnvOverridesDefaults)
{
    const auto env = fake_env({{"PART_K", "3"}, {"PART_SEED", "7"}, {"PART_TEMPERATURE", "0.5"}, {"PART_RETRIEVAL", "off"}});
    const auto from_env = EngineConfig::from_env(env);
    EXPECT_EQ(from_env.pipeline.k, 3u);
    EXPECT_EQ(from_env.pipeline.rng_seed, 7u);
    EXPECT_DOUBLE_EQ(from_env.pipeline.generator_temperature, 0.5);
    EXPECT_FALSE(from_env.pipeline.retrieval_enabled);

    const auto merged = EngineConfig::from_json(json{{"k", 10}}, from_env);
    EXPECT_EQ(merged.pipeline.k, 10u);
    EXPECT_EQ(merged.pipeline.rng_seed, 7u);

    EXPECT_THROW(EngineConfig::from_env(fake_env({{"PART_K", "five"}})), Error);
    EXPECT_THROW(EngineConfig::from_env(fake_env({{"PART_RETRIEVAL", "maybe"}})), Error);
    EXPECT_THROW(EngineConfig::from_json(json{{"backend", "carrier-pigeon"}}).validate(), Error);
    EXPECT_EQ(EngineConfig::from_json(EngineConfig{}.to_json()).to_json(), EngineConfig{}.to_json());
}

TEST(Engine, SessionLifecycle)
{
    ScriptedEngine e;
    const auto opened = e.engine->open_session("hiker");
    EXPECT_EQ(opened.session_id, "sess-1");
    EXPECT_EQ(opened.greeting_id, "sess-1:0");
    EXPECT_EQ(opened.greeting.text, "Larches are gold on the alpine trails. Going up this autumn?");
    EXPECT_EQ(opened.trace.mode, orchestrator::ResponseMode::grounded);

    const auto turn = e.engine->post_message(opened.session_id, "What about Dune 2?");
    EXPECT_EQ(turn.user_message_id, "sess-1:1");
    EXPECT_EQ(turn.response_id, "sess-1:2");
    EXPECT_EQ(turn.trace.decision->category(), IntentCategory::explicit_retrieval);
    EXPECT_EQ(turn.trace.retrieval->notes.size(), 2u);

    EXPECT_EQ(e.engine->open_sessions(), 1u);
    const auto closed = e.engine->close_session(opened.session_id);
    EXPECT_EQ(closed.messages, 3u);
    EXPECT_EQ(closed.duration_ms, closed.closed_at - closed.opened_at);
    EXPECT_EQ(e.engine->open_sessions(), 0u);
    EXPECT_NO_THROW(e.engine->close_session(opened.session_id));

    try {
        e.engine->post_message(opened.session_id, "hello?");
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::conflict);
    }
    try {
        e.engine->post_message("sess-404", "hello?");
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::not_found);
    }

    const auto rec = e.engine->transcript_log().load_transcript(opened.session_id);
    ASSERT_TRUE(rec);
    EXPECT_EQ(rec->turns.size(), 2u);
    EXPECT_EQ(rec->duration_ms, closed.duration_ms);
}

TEST(Engine, OverridesAndValidation)
{
    ScriptedEngine e;
    EXPECT_THROW(e.engine->open_session(""), Error);
    EXPECT_THROW(e.engine->open_session("hiker", json{{"k", 0}}), Error);
    const auto opened = e.engine->open_session("hiker", json{{"retrieval_enabled", false}});
    EXPECT_FALSE(opened.trace.retrieval);
}

TEST(Engine, ShutdownClosesOpenSessionsAndRejectsWork)
{
    ScriptedEngine e;
    const auto a = e.engine->open_session("hiker");
    e.engine->post_message(a.session_id, "hello");
    e.engine->open_session("someone");
    e.engine->shutdown();
    EXPECT_EQ(e.engine->open_sessions(), 0u);
    EXPECT_EQ(e.engine->transcript_log().mean_session_duration().sessions, 2u);
    EXPECT_THROW(e.engine->open_session("hiker"), Error);
}

TEST(Engine, FileStorePersistsProfiles)
{
    ScriptedEngine e(true);
    EXPECT_EQ(e.engine->profile("hiker").entries.size(), 1u);
    EXPECT_TRUE(std::filesystem::exists(e.dir / "store" / "profiles"));
}

TEST(MapError, StatusCodes)
{
    EXPECT_EQ(map_error(ErrorCode::invalid_argument).status, 400);
    EXPECT_EQ(map_error(ErrorCode::most_recent_message_too_large).status, 400);
    EXPECT_EQ(map_error(ErrorCode::not_found).status, 404);
    EXPECT_EQ(map_error(ErrorCode::conflict).status, 409);
    EXPECT_EQ(map_error(ErrorCode::stale_version).status, 409);
    EXPECT_EQ(map_error(ErrorCode::fixture_miss).status, 502);
    EXPECT_STREQ(map_error(ErrorCode::backend_unreachable).code, "upstream_failure");
    EXPECT_EQ(map_error(ErrorCode::storage_corrupt).status, 500);
}

class HttpTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        ServerSettings s;
        s.port = 0;
        server = std::make_unique<HttpServer>(*e.engine, s);
        port = server->start();
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
    }
    void TearDown() override { server->stop(); }

    httplib::Result post(const std::string& path, const json& body)
    {
        return client->Post(path, body.dump(), "application/json");
    }

    ScriptedEngine e;
    std::unique_ptr<HttpServer> server;
    std::unique_ptr<httplib::Client> client;
    int port = 0;
};

TEST_F(HttpTest, OpenPostCloseFlow)
{
    auto res = post("/v1/sessions", {{"user_id", "hiker"}});
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 201) << res->body;
    const auto opened = json::parse(res->body);
    const std::string id = opened["session_id"];
    EXPECT_EQ(opened["greeting"]["role"], "assistant");
    EXPECT_EQ(opened["greeting"]["message_id"], id + ":0");
    EXPECT_EQ(opened["trace"]["mode"], "grounded");
    EXPECT_GT(opened["trace"]["note_count"].get<int>(), 0);

    res = post("/v1/sessions/" + id + "/messages", {{"text", "What about Dune 2?"}});
    ASSERT_EQ(res->status, 200) << res->body;
    const auto turn = json::parse(res->body);
    EXPECT_EQ(turn["intent_category"], "explicit_retrieval");
    EXPECT_EQ(turn["response"]["text"], "Tell me more.");
    EXPECT_EQ(turn["trace"]["note_count"], 2);

    res = post("/v1/sessions/" + id + "/close", json::object());
    ASSERT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body)["state"], "closed");

    res = post("/v1/sessions/" + id + "/messages", {{"text", "still there?"}});
    EXPECT_EQ(res->status, 409);
}

TEST_F(HttpTest, ErrorsCarryCodeAndCorrelationId)
{
    auto res = post("/v1/sessions/nope/messages", {{"text", "hi"}});
    ASSERT_EQ(res->status, 404);
    const auto err = json::parse(res->body)["error"];
    EXPECT_EQ(err["code"], "not_found");
    EXPECT_FALSE(err["correlation_id"].get<std::string>().empty());
    EXPECT_EQ(res->get_header_value("X-Correlation-Id"), err["correlation_id"]);

    res = client->Post("/v1/sessions", "{not json", "application/json");
    EXPECT_EQ(res->status, 400);
    EXPECT_EQ(json::parse(res->body)["error"]["code"], "bad_request");

    res = post("/v1/sessions", json::object());
    EXPECT_EQ(res->status, 400);

    const auto opened = json::parse(post("/v1/sessions", {{"user_id", "x"}})->body);
    res = post("/v1/sessions/" + opened["session_id"].get<std::string>() + "/messages", {{"text", "  "}});
    EXPECT_EQ(res->status, 400);

    res = client->Get("/v1/nothing-here");
    EXPECT_EQ(res->status, 404);
    EXPECT_EQ(json::parse(res->body)["error"]["code"], "not_found");
}

TEST_F(HttpTest, ProfileAndHealth)
{
    auto res = client->Get("/v1/profiles/hiker");
    ASSERT_EQ(res->status, 200);
    EXPECT_EQ(persistence::profile_from_json(json::parse(res->body)), e.engine->profile("hiker"));

    res = client->Get("/v1/health");
    ASSERT_EQ(res->status, 200);
    const auto health = json::parse(res->body);
    EXPECT_EQ(health["status"], "ok");
    EXPECT_EQ(health["backend"], "scripted");
}

TEST(HttpAuth, ApiKeyRequiredWhenConfigured)
{
    ScriptedEngine e;
    ServerSettings s;
    s.port = 0;
    s.api_key = "k3y";
    HttpServer server(*e.engine, s);
    httplib::Client client("127.0.0.1", server.start());
    auto res = client.Get("/v1/profiles/hiker");
    EXPECT_EQ(res->status, 401);
    EXPECT_EQ(json::parse(res->body)["error"]["code"], "unauthorized");
    EXPECT_EQ(client.Get("/v1/health")->status, 200);
    res = client.Get("/v1/profiles/hiker", {{"Authorization", "Bearer k3y"}});
    EXPECT_EQ(res->status, 200);
    server.stop();
}

TEST(HttpConflict, SecondConcurrentPostGets409)
{
    GatedLlm llm;
    ASSERT_EQ(setenv("PART_LLM_URL", llm.url().c_str(), 1), 0);
    EngineConfig cfg;
    cfg.backend = "live";
    cfg.deterministic = true;
    Engine engine(cfg);
    unsetenv("PART_LLM_URL");

    ServerSettings s;
    s.port = 0;
    HttpServer server(engine, s);
    const int port = server.start();
    httplib::Client c1("127.0.0.1", port), c2("127.0.0.1", port);

    const auto opened = json::parse(c1.Post("/v1/sessions", json{{"user_id", "new-user"}}.dump(), "application/json")->body);
    const std::string path = "/v1/sessions/" + opened["session_id"].get<std::string>() + "/messages";

    auto first = std::async(std::launch::async, [&] {
        return c1.Post(path, json{{"text", "SLOW question"}}.dump(), "application/json");
    });
    llm.wait_blocked();
    const auto second = c2.Post(path, json{{"text", "impatient"}}.dump(), "application/json");
    ASSERT_TRUE(second);
    EXPECT_EQ(second->status, 409);
    EXPECT_EQ(json::parse(second->body)["error"]["code"], "conflict");

    llm.release();
    const auto r1 = first.get();
    ASSERT_TRUE(r1);
    EXPECT_EQ(r1->status, 200) << r1->body;
    server.stop();
}

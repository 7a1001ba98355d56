#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "eval/harness.hpp"
#include "gateway/gateway.hpp"
#include "orchestrator/orchestrator.hpp"
#include "persistence/profile_store.hpp"
#include "persistence/transcript_log.hpp"
#include "retrieval/retriever.hpp"

namespace part::service {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

struct EngineConfig {
    std::string backend = "scripted";  // scripted | live
    std::optional<std::filesystem::path> fixtures;
    std::optional<std::filesystem::path> judge_fixtures;
    std::optional<std::filesystem::path> corpus;
    std::optional<std::string> retriever_url;
    std::optional<std::filesystem::path> question_bank;
    std::optional<std::filesystem::path> templates_dir;
    std::optional<std::filesystem::path> store_dir;  // unset: in-memory profiles and event log
    orchestrator::PipelineConfig pipeline;
    bool deterministic = false;  // logical clock and sequential session ids
    Timestamp clock_start = 0;

    // Throws invalid_argument for an unknown backend or an invalid pipeline.
    void validate() const;

    // Overlays PART_BACKEND, PART_FIXTURES, PART_JUDGE_FIXTURES, PART_CORPUS,
    // PART_RETRIEVER_URL, PART_QUESTION_BANK, PART_TEMPLATES, PART_STORE,
    // PART_K, PART_SEED, PART_TEMPERATURE, PART_RETRIEVAL, PART_DETERMINISTIC.
    static EngineConfig from_env(const EnvLookup& env, EngineConfig base);
    static EngineConfig from_env(const EnvLookup& env);
    // Same keys in lower case without the prefix ("k", "seed", "store", ...).
    // Missing keys keep the values of `base`.
    static EngineConfig from_json(const nlohmann::json& j, EngineConfig base);
    static EngineConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct OpenedSession {
    std::string session_id;
    std::string greeting_id;
    Message greeting;
    orchestrator::TurnTrace trace;
};

struct TurnOutcome {
    std::string session_id;
    std::string user_message_id;
    std::string response_id;
    Message user_message;
    Message response;
    orchestrator::TurnTrace trace;
};

struct ClosedSession {
    std::string session_id;
    Timestamp opened_at = 0;
    Timestamp closed_at = 0;
    std::int64_t duration_ms = 0;
    std::size_t messages = 0;
};

// Owns backends, corpus, profile store, event log and the live sessions.
// All methods are thread-safe; turns on one session are serialized and a
// turn arriving while another is running fails with `conflict`.
class Engine {
public:
    explicit Engine(EngineConfig config);
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    // `overrides` may carry k, seed, retrieval_enabled, temperature.
    OpenedSession open_session(const std::string& user_id, const nlohmann::json& overrides = {});
    // not_found for unknown ids, conflict when a turn is in flight or the
    // session is closed.
    TurnOutcome post_message(const std::string& session_id, const std::string& text);
    ClosedSession close_session(const std::string& session_id);
    UserProfile profile(const std::string& user_id) const;

    eval::EvalReport run_eval(const std::vector<eval::EvalCase>& dataset, eval::EvalConfig config) const;

    // Rejects new work, waits for in-flight turns and closes open sessions.
    void shutdown();

    std::size_t open_sessions() const;
    const EngineConfig& config() const { return config_; }
    const gateway::Gateway& gateway() const { return *gateway_; }
    gateway::Gateway& gateway() { return *gateway_; }
    persistence::TranscriptLog& transcript_log() { return *log_; }
    persistence::ProfileStore& store() { return *store_; }
    std::string backend_label() const;

private:
    struct Slot {
        std::mutex turn;
        orchestrator::Session session;
        std::size_t next_message = 0;
    };

    std::shared_ptr<Slot> find(const std::string& session_id) const;
    std::string new_session_id();
    void enter();
    void leave();

    EngineConfig config_;
    std::unique_ptr<gateway::Gateway> gateway_;
    std::shared_ptr<const retrieval::Retriever> retriever_;
    std::unique_ptr<persistence::ProfileStore> store_;
    std::unique_ptr<persistence::TranscriptLog> log_;
    std::unique_ptr<orchestrator::Orchestrator> orchestrator_;

    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::uint64_t next_session_ = 1;

    std::mutex drain_mutex_;
    std::condition_variable drained_;
    std::size_t in_flight_ = 0;
    bool stopping_ = false;
};

}  // namespace part::service

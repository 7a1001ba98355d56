#include "part/part.h"

#include <cstring>
#include <memory>
#include <string>

#include "common/error.hpp"
#include "common/log.hpp"
#include "persistence/codec.hpp"
#include "retrieval/corpus.hpp"
#include "retrieval/retriever.hpp"
#include "service/engine.hpp"
#include "service/http_server.hpp"

struct part_engine {
    std::unique_ptr<part::service::Engine> engine;
};

struct part_server {
    std::unique_ptr<part::service::HttpServer> server;
};

namespace {

using nlohmann::json;
using part::Error;
using part::ErrorCode;

thread_local std::string t_last_error;
thread_local std::string t_last_kind;

part_status status_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::most_recent_message_too_large:
    case ErrorCode::missing_placeholder:
    case ErrorCode::length_mismatch:
        return PART_ERR_INVALID_ARGUMENT;
    case ErrorCode::invalid_state: return PART_ERR_INVALID_STATE;
    case ErrorCode::not_found: return PART_ERR_NOT_FOUND;
    case ErrorCode::conflict:
    case ErrorCode::stale_version:
        return PART_ERR_CONFLICT;
    case ErrorCode::backend_unreachable:
    case ErrorCode::backend_rejected:
    case ErrorCode::fixture_miss:
    case ErrorCode::empty_completion:
        return PART_ERR_BACKEND;
    case ErrorCode::extractor_parse:
    case ErrorCode::refiner_parse:
    case ErrorCode::empty_summary:
    case ErrorCode::judge_parse:
        return PART_ERR_PARSE;
    case ErrorCode::duplicate_note_id:
    case ErrorCode::corpus_format:
        return PART_ERR_CORPUS;
    case ErrorCode::storage_corrupt: return PART_ERR_STORAGE;
    case ErrorCode::io: return PART_ERR_IO;
    case ErrorCode::eval_aborted: return PART_ERR_EVAL_ABORTED;
    }
    return PART_ERR_INTERNAL;
}

part_status fail(part_status status, std::string kind, std::string message)
{
    t_last_kind = std::move(kind);
    t_last_error = std::move(message);
    return status;
}

// Runs fn, translating exceptions into a status and the thread's last error.
template <typename Fn>
part_status guarded(Fn&& fn)
{
    t_last_error.clear();
    t_last_kind.clear();
    try {
        fn();
        return PART_OK;
    } catch (const Error& e) {
        return fail(status_for(e.code()), part::to_string(e.code()), e.what());
    } catch (const json::exception& e) {
        return fail(PART_ERR_INVALID_ARGUMENT, "invalid_argument", e.what());
    } catch (const std::bad_alloc&) {
        return fail(PART_ERR_INTERNAL, "internal", "out of memory");
    } catch (const std::exception& e) {
        return fail(PART_ERR_INTERNAL, "internal", e.what());
    }
}

char* copy_out(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void emit(char** out_json, const json& j)
{
    if (out_json) *out_json = copy_out(j.dump());
}

json parse_json_arg(const char* text, const char* what)
{
    if (!text || !*text) return json::object();
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorCode::invalid_argument, std::string(what) + " must be a JSON object");
    return j;
}

void require(const void* p, const char* what)
{
    if (!p) throw Error(ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

json message_json(const std::string& id, const part::Message& m)
{
    return {{"message_id", id}, {"role", part::to_string(m.role)}, {"text", m.text}, {"timestamp", m.timestamp}};
}

}  // namespace

extern "C" {

const char* part_version(void) { return "1.0.0"; }

const char* part_status_name(part_status status)
{
    switch (status) {
    case PART_OK: return "ok";
    case PART_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PART_ERR_INVALID_STATE: return "invalid_state";
    case PART_ERR_NOT_FOUND: return "not_found";
    case PART_ERR_CONFLICT: return "conflict";
    case PART_ERR_BACKEND: return "backend";
    case PART_ERR_PARSE: return "parse";
    case PART_ERR_CORPUS: return "corpus";
    case PART_ERR_STORAGE: return "storage";
    case PART_ERR_IO: return "io";
    case PART_ERR_EVAL_ABORTED: return "eval_aborted";
    case PART_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* part_last_error(void) { return t_last_error.c_str(); }

const char* part_last_error_kind(void) { return t_last_kind.c_str(); }

void part_string_free(char* s) { std::free(s); }

part_status part_set_log_level(const char* level)
{
    return guarded([&] {
        require(level, "level");
        using part::log::Level;
        const std::string l = level;
        if (l == "debug") part::log::set_level(Level::debug);
        else if (l == "info") part::log::set_level(Level::info);
        else if (l == "warn") part::log::set_level(Level::warn);
        else if (l == "error") part::log::set_level(Level::error);
        else if (l == "off") part::log::set_level(Level::off);
        else throw Error(ErrorCode::invalid_argument, "unknown log level '" + l + "'");
    });
}

part_status part_engine_create(const char* config_json, part_engine** out)
{
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        json j = parse_json_arg(config_json, "config");
        const bool inherit_env = j.value("inherit_env", true);
        j.erase("inherit_env");
        part::service::EngineConfig base;
        if (inherit_env) base = part::service::EngineConfig::from_env(part::service::process_env(), base);
        auto config = part::service::EngineConfig::from_json(j, base);
        auto handle = std::make_unique<part_engine>();
        handle->engine = std::make_unique<part::service::Engine>(std::move(config));
        *out = handle.release();
    });
}

void part_engine_destroy(part_engine* engine) { delete engine; }

part_status part_session_open(part_engine* engine, const char* user_id, const char* overrides_json, char** out_json)
{
    return guarded([&] {
        require(engine, "engine");
        require(user_id, "user_id");
        const auto opened = engine->engine->open_session(user_id, parse_json_arg(overrides_json, "overrides"));
        emit(out_json, {{"session_id", opened.session_id},
                        {"greeting", message_json(opened.greeting_id, opened.greeting)},
                        {"degraded", opened.trace.degraded},
                        {"trace", part::orchestrator::to_json(opened.trace)}});
    });
}

part_status part_session_post(part_engine* engine, const char* session_id, const char* text, char** out_json)
{
    return guarded([&] {
        require(engine, "engine");
        require(session_id, "session_id");
        require(text, "text");
        const auto turn = engine->engine->post_message(session_id, text);
        json category;
        if (turn.trace.decision) category = part::to_string(turn.trace.decision->category());
        emit(out_json, {{"session_id", turn.session_id},
                        {"user_message", message_json(turn.user_message_id, turn.user_message)},
                        {"response", message_json(turn.response_id, turn.response)},
                        {"intent_category", category},
                        {"degraded", turn.trace.degraded},
                        {"trace", part::orchestrator::to_json(turn.trace)}});
    });
}

part_status part_session_close(part_engine* engine, const char* session_id, char** out_json)
{
    return guarded([&] {
        require(engine, "engine");
        require(session_id, "session_id");
        const auto closed = engine->engine->close_session(session_id);
        emit(out_json, {{"session_id", closed.session_id},
                        {"state", "closed"},
                        {"opened_at", closed.opened_at},
                        {"closed_at", closed.closed_at},
                        {"duration_ms", closed.duration_ms},
                        {"messages", closed.messages}});
    });
}

part_status part_session_transcript(part_engine* engine, const char* session_id, char** out_json)
{
    return guarded([&] {
        require(engine, "engine");
        require(session_id, "session_id");
        const auto rec = engine->engine->transcript_log().load_transcript(session_id);
        if (!rec) throw Error(ErrorCode::not_found, std::string("no transcript for '") + session_id + "'");
        json j = {{"session_id", rec->session_id},
                  {"user_id", rec->user_id},
                  {"opened_at", rec->opened_at},
                  {"turns", rec->turns}};
        j["closed_at"] = rec->closed_at ? json(*rec->closed_at) : json();
        j["duration_ms"] = rec->duration_ms ? json(*rec->duration_ms) : json();
        emit(out_json, j);
    });
}

part_status part_session_duration_stats(part_engine* engine, int64_t from_ms, int64_t to_ms, char** out_json)
{
    return guarded([&] {
        require(engine, "engine");
        const auto stats = engine->engine->transcript_log().mean_session_duration({from_ms, to_ms});
        emit(out_json, {{"sessions", stats.sessions},
                        {"mean_seconds", stats.empty ? json() : json(stats.mean_seconds)}});
    });
}

part_status part_profile_get(part_engine* engine, const char* user_id, char** out_json)
{
    return guarded([&] {
        require(engine, "engine");
        require(user_id, "user_id");
        emit(out_json, part::persistence::to_json(engine->engine->profile(user_id)));
    });
}

part_status part_profile_put(part_engine* engine, const char* profile_json, char** out_json)
{
    return guarded([&] {
        require(engine, "engine");
        const auto incoming = part::persistence::profile_from_json(parse_json_arg(profile_json, "profile"));
        if (incoming.user_id.empty()) throw Error(ErrorCode::invalid_argument, "profile needs a user_id");
        const auto stored =
            engine->engine->store().update(incoming.user_id, [&](const part::UserProfile& current) {
                part::UserProfile next = current;
                next.entries = incoming.entries;
                next.version = current.version + 1;
                return next;
            });
        emit(out_json, part::persistence::to_json(stored));
    });
}

part_status part_corpus_index(const char* corpus_path, const char* query, size_t k, char** out_json)
{
    return guarded([&] {
        require(corpus_path, "corpus_path");
        const auto notes = part::retrieval::load_corpus(corpus_path);
        const auto index = part::retrieval::CorpusIndex::build(notes);
        json j = {{"documents", index.documents().size()}, {"avg_doc_length", index.avg_doc_length()}};
        if (query) {
            const auto result =
                part::retrieval::retrieve(index, part::RefinedQuery(query, part::QueryOrigin::user_message), k);
            json hits = json::array();
            for (const auto& n : result.notes)
                hits.push_back({{"note_id", n.note.note_id}, {"title", n.note.title}, {"score", n.score}});
            j["query"] = result.query.text();
            j["k"] = k;
            j["results"] = hits;
        }
        emit(out_json, j);
    });
}

part_status part_eval_run(part_engine* engine, const char* request_json, char** out_json)
{
    return guarded([&] {
        require(engine, "engine");
        const json req = parse_json_arg(request_json, "request");
        if (!req.contains("dataset") || !req["dataset"].is_string())
            throw Error(ErrorCode::invalid_argument, "request needs a 'dataset' path");
        const auto dataset = part::eval::load_dataset(req["dataset"].get<std::string>());

        part::eval::EvalConfig config;
        config.pipeline = engine->engine->config().pipeline;
        if (req.contains("arms")) config.arms = part::eval::parse_arm_list(req["arms"].get<std::string>());
        if (req.contains("ks")) config.ks = part::eval::parse_k_list(req["ks"].get<std::string>());
        config.strict = req.value("strict", false);
        config.concurrency = req.value("concurrency", config.concurrency);
        config.human_sample_size = req.value("human_sample_size", config.human_sample_size);
        if (req.contains("human_labels") && req["human_labels"].is_string())
            config.human_labels = part::eval::load_human_labels(req["human_labels"].get<std::string>());

        const auto report = engine->engine->run_eval(dataset, config);
        if (req.contains("out") && req["out"].is_string()) part::eval::write_report(report, req["out"].get<std::string>());
        json j = part::eval::results_json(report);
        j["report"] = part::eval::render_report(report);
        emit(out_json, j);
    });
}

part_status part_server_start(part_engine* engine, const char* server_json, part_server** out)
{
    return guarded([&] {
        require(engine, "engine");
        require(out, "out");
        *out = nullptr;
        const json j = parse_json_arg(server_json, "server config");
        part::service::ServerSettings settings;
        settings.host = j.value("host", settings.host);
        settings.port = j.value("port", settings.port);
        settings.threads = j.value("threads", settings.threads);
        if (j.contains("api_key") && j["api_key"].is_string() && !j["api_key"].get<std::string>().empty())
            settings.api_key = j["api_key"].get<std::string>();
        auto handle = std::make_unique<part_server>();
        handle->server = std::make_unique<part::service::HttpServer>(*engine->engine, settings);
        handle->server->start();
        *out = handle.release();
    });
}

int part_server_port(const part_server* server) { return server ? server->server->port() : -1; }

part_status part_server_stop(part_server* server)
{
    return guarded([&] {
        require(server, "server");
        server->server->stop();
    });
}

void part_server_destroy(part_server* server) { delete server; }

}  // extern "C"

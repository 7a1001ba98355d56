#include "service/http_server.hpp"

#include <atomic>
#include <chrono>
#include <random>

#include <httplib.h>

#include "common/error.hpp"
#include "common/log.hpp"
#include "persistence/codec.hpp"

namespace part::service {
namespace {

using nlohmann::json;

std::string new_correlation_id()
{
    static std::atomic<std::uint64_t> counter{0};
    static const std::uint64_t salt = std::random_device{}();
    char buf[40];
    std::snprintf(buf, sizeof buf, "req-%08llx-%06llx", static_cast<unsigned long long>(salt & 0xffffffffu),
                  static_cast<unsigned long long>(++counter));
    return buf;
}

json message_json(const std::string& id, const Message& m)
{
    return {{"message_id", id}, {"role", to_string(m.role)}, {"text", m.text}, {"timestamp", m.timestamp}};
}

void send_json(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const std::string& correlation_id, int status, const char* code,
                const std::string& message)
{
    log::warn("http ", status, " ", code, " [", correlation_id, "]: ", message);
    send_json(res, status,
              {{"error", {{"code", code}, {"message", message}, {"correlation_id", correlation_id}}}});
}

json parse_body(const httplib::Request& req)
{
    if (req.body.empty()) return json::object();
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
    return j;
}

std::string required_string(const json& body, const char* key)
{
    if (!body.contains(key) || !body[key].is_string())
        throw Error(ErrorCode::invalid_argument, std::string("missing string field '") + key + "'");
    return body[key].get<std::string>();
}

}  // namespace

ApiErrorMapping map_error(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::most_recent_message_too_large:
    case ErrorCode::corpus_format:
    case ErrorCode::duplicate_note_id:
    case ErrorCode::length_mismatch:
        return {400, "bad_request"};
    case ErrorCode::not_found:
        return {404, "not_found"};
    case ErrorCode::conflict:
    case ErrorCode::invalid_state:
    case ErrorCode::stale_version:
        return {409, "conflict"};
    case ErrorCode::backend_unreachable:
    case ErrorCode::backend_rejected:
    case ErrorCode::fixture_miss:
    case ErrorCode::empty_completion:
        return {502, "upstream_failure"};
    default:
        return {500, "internal"};
    }
}

HttpServer::HttpServer(Engine& engine, ServerSettings settings)
    : engine_(engine), settings_(std::move(settings)), server_(std::make_unique<httplib::Server>())
{
    const std::size_t threads = std::max<std::size_t>(1, settings_.threads);
    server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    install_routes();
}

HttpServer::~HttpServer()
{
    try {
        stop();
    } catch (const std::exception& e) {
        log::error("http server stop: ", e.what());
    }
}

void HttpServer::install_routes()
{
    using Handler = std::function<void(const httplib::Request&, httplib::Response&, const std::string&)>;
    auto wrap = [this](Handler h) {
        return [this, h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
            const std::string cid = new_correlation_id();
            res.set_header("X-Correlation-Id", cid);
            res.set_header("Access-Control-Allow-Origin", "*");
            if (settings_.api_key && req.path != "/v1/health" &&
                req.get_header_value("Authorization") != "Bearer " + *settings_.api_key) {
                send_error(res, cid, 401, "unauthorized", "missing or wrong API key");
                return;
            }
            try {
                h(req, res, cid);
                log::info("http ", req.method, " ", req.path, " -> ", res.status, " [", cid, "]");
            } catch (const Error& e) {
                const auto m = map_error(e.code());
                send_error(res, cid, m.status, m.code, e.what());
            } catch (const std::exception& e) {
                log::error("http ", req.method, " ", req.path, " [", cid, "] unexpected: ", e.what());
                send_error(res, cid, 500, "internal", "internal error");
            }
        };
    };

    server_->Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
        res.status = 204;
    });

    server_->Post("/v1/sessions", wrap([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
        const json body = parse_body(req);
        const std::string user_id = required_string(body, "user_id");
        const json overrides = body.value("config", json::object());
        if (!overrides.is_object()) throw Error(ErrorCode::invalid_argument, "'config' must be an object");
        const auto opened = engine_.open_session(user_id, overrides);
        send_json(res, 201,
                  {{"session_id", opened.session_id},
                   {"user_id", user_id},
                   {"greeting", message_json(opened.greeting_id, opened.greeting)},
                   {"degraded", opened.trace.degraded},
                   {"trace", orchestrator::summary_json(opened.trace)}});
    }));

    server_->Post(R"(/v1/sessions/([^/]+)/messages)",
                  wrap([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
                      const json body = parse_body(req);
                      const std::string text = required_string(body, "text");
                      const auto turn = engine_.post_message(req.matches[1], text);
                      json category;
                      if (turn.trace.decision) category = to_string(turn.trace.decision->category());
                      send_json(res, 200,
                                {{"session_id", turn.session_id},
                                 {"user_message", message_json(turn.user_message_id, turn.user_message)},
                                 {"response", message_json(turn.response_id, turn.response)},
                                 {"intent_category", category},
                                 {"degraded", turn.trace.degraded},
                                 {"trace", orchestrator::summary_json(turn.trace)}});
                  }));

    server_->Post(R"(/v1/sessions/([^/]+)/close)",
                  wrap([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
                      const auto closed = engine_.close_session(req.matches[1]);
                      send_json(res, 200,
                                {{"session_id", closed.session_id},
                                 {"state", "closed"},
                                 {"opened_at", closed.opened_at},
                                 {"closed_at", closed.closed_at},
                                 {"duration_ms", closed.duration_ms},
                                 {"messages", closed.messages}});
                  }));

    server_->Get(R"(/v1/profiles/([^/]+))",
                 wrap([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
                     send_json(res, 200, persistence::to_json(engine_.profile(req.matches[1])));
                 }));

    server_->Get("/v1/health", wrap([this](const httplib::Request&, httplib::Response& res, const std::string&) {
        send_json(res, 200,
                  {{"status", "ok"}, {"backend", engine_.backend_label()}, {"open_sessions", engine_.open_sessions()}});
    }));

    server_->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        const std::string cid = new_correlation_id();
        res.set_header("X-Correlation-Id", cid);
        const bool missing = res.status == 404;
        log::warn("http ", res.status, " [", cid, "]: ", req.method, " ", req.path);
        res.set_content(json{{"error",
                              {{"code", missing ? "not_found" : "bad_request"},
                               {"message", missing ? "no such route" : "malformed request"},
                               {"correlation_id", cid}}}}
                            .dump(),
                        "application/json");
    });
}

namespace {

int bind(httplib::Server& server, const ServerSettings& settings)
{
    const int port = settings.port == 0 ? server.bind_to_any_port(settings.host)
                                        : (server.bind_to_port(settings.host, settings.port) ? settings.port : -1);
    if (port <= 0) throw Error(ErrorCode::io, "cannot bind " + settings.host + ":" + std::to_string(settings.port));
    return port;
}

}  // namespace

int HttpServer::start()
{
    if (thread_.joinable()) return port_;
    port_ = bind(*server_, settings_);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void HttpServer::run()
{
    port_ = bind(*server_, settings_);
    log::info("listening on ", settings_.host, ":", port_);
    server_->listen_after_bind();
}

void HttpServer::stop()
{
    if (server_->is_running()) server_->stop();
    if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
    engine_.shutdown();
}

}  // namespace part::service

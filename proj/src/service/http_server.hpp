#pragma once

#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "common/error.hpp"
#include "service/engine.hpp"

namespace httplib {
class Server;
}

namespace part::service {

struct ServerSettings {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::optional<std::string> api_key;  // when set, requests need "Authorization: Bearer <key>"
    std::size_t threads = 8;
};

// HTTP/JSON front end over an Engine.
//   POST /v1/sessions                {user_id, config?}   -> 201
//   POST /v1/sessions/{id}/messages  {text}               -> 200
//   POST /v1/sessions/{id}/close                          -> 200
//   GET  /v1/profiles/{user_id}                           -> 200
//   GET  /v1/health                                       -> 200
// Errors: {"error": {"code", "message", "correlation_id"}} with the matching
// status; the correlation id is also logged and sent as X-Correlation-Id.
class HttpServer {
public:
    HttpServer(Engine& engine, ServerSettings settings);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds and starts serving on a background thread. Returns the bound port.
    int start();
    // Serves on the calling thread until stop() is called elsewhere.
    void run();
    // Stops accepting, lets running handlers finish, then drains the engine.
    void stop();
    int port() const { return port_; }

private:
    void install_routes();

    Engine& engine_;
    ServerSettings settings_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

// HTTP status and API error code for an engine error.
struct ApiErrorMapping {
    int status;
    const char* code;
};
ApiErrorMapping map_error(ErrorCode code);

}  // namespace part::service

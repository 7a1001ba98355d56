#include "gateway/live_backend.hpp"

#include <cctype>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "common/error.hpp"

namespace part::gateway {
namespace {

std::optional<std::string> env(const std::string& name)
{
    const char* v = std::getenv(name.c_str());
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

std::optional<std::string> env_for_role(const std::string& base, std::optional<TemplateId> role)
{
    if (role) {
        std::string suffix = to_string(*role);
        for (auto& c : suffix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (auto v = env(base + "__" + suffix)) return v;
    }
    return env(base);
}

}  // namespace

std::optional<LiveBackendSettings> LiveBackendSettings::from_env(std::optional<TemplateId> role)
{
    auto url = env_for_role("PART_LLM_URL", role);
    if (!url) return std::nullopt;
    LiveBackendSettings s;
    s.url = *url;
    s.api_key = env_for_role("PART_LLM_KEY", role).value_or("");
    s.model = env_for_role("PART_LLM_MODEL", role).value_or("default");
    return s;
}

LiveBackend::LiveBackend(LiveBackendSettings settings) : settings_(std::move(settings))
{
    const auto scheme_end = settings_.url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorCode::invalid_argument, "backend url needs a scheme: " + settings_.url);
    const auto path_start = settings_.url.find('/', scheme_end + 3);
    scheme_host_port_ = settings_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/v1/chat/completions" : settings_.url.substr(path_start);
    slots_ = std::make_unique<std::counting_semaphore<>>(std::max(1, settings_.max_concurrency));
}

std::string LiveBackend::request_body(const BackendCall& call) const
{
    nlohmann::json body = {
        {"model", settings_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", call.prompt}}})},
        {"temperature", call.temperature},
        {"max_tokens", call.max_output_tokens},
        {"stream", false},
    };
    return body.dump();
}

std::string LiveBackend::complete(const BackendCall& call)
{
    slots_->acquire();
    struct Release {
        std::counting_semaphore<>* s;
        ~Release() { s->release(); }
    } release{slots_.get()};

    httplib::Client client(scheme_host_port_);
    const auto timeout = std::chrono::duration_cast<std::chrono::seconds>(settings_.timeout).count();
    client.set_connection_timeout(timeout, 0);
    client.set_read_timeout(timeout, 0);
    client.set_write_timeout(timeout, 0);

    httplib::Headers headers;
    if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);

    auto res = client.Post(path_, headers, request_body(call), "application/json");
    if (!res)
        throw Error(ErrorCode::backend_unreachable,
                    "backend unreachable at " + settings_.url + ": " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) throw BackendRejected(res->status, res->body.substr(0, 200));

    const auto doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
        throw BackendRejected(res->status, "malformed completion body");
    const auto& choice = doc["choices"][0];
    std::string text;
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string())
        text = choice["message"]["content"].get<std::string>();
    else if (choice.contains("text") && choice["text"].is_string())
        text = choice["text"].get<std::string>();
    return text;
}

}  // namespace part::gateway

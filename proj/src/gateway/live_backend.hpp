#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>

#include "gateway/backend.hpp"

namespace part::gateway {

struct LiveBackendSettings {
    // Full chat-completions endpoint, e.g. http://localhost:8000/v1/chat/completions
    std::string url;
    std::string api_key;
    std::string model = "default";
    std::chrono::seconds timeout{60};
    int max_concurrency = 8;

    // Reads PART_LLM_URL / PART_LLM_KEY / PART_LLM_MODEL. When role is given,
    // PART_LLM_URL__<ROLE> etc. take precedence (role upper-cased, e.g. GENERATOR).
    static std::optional<LiveBackendSettings> from_env(std::optional<TemplateId> role = std::nullopt);
};

// OpenAI-compatible chat-completions client. The rendered prompt is sent as a
// single user message; temperature and max_tokens are forwarded as given.
class LiveBackend : public Backend {
public:
    explicit LiveBackend(LiveBackendSettings settings);

    std::string label() const override { return "live:" + settings_.model; }
    std::string complete(const BackendCall& call) override;

    // The JSON request body sent for a call. Exposed for wire-format tests.
    std::string request_body(const BackendCall& call) const;

private:
    LiveBackendSettings settings_;
    std::string scheme_host_port_;
    std::string path_;
    std::unique_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace part::gateway

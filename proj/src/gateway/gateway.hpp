#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "gateway/backend.hpp"
#include "gateway/prompt_template.hpp"

namespace part::gateway {

inline constexpr double kDefaultTemperature = 0.9;
inline constexpr int kDefaultMaxOutputTokens = 512;

struct CompletionRequest {
    TemplateId template_id = TemplateId::refiner;
    Bindings bindings;
    double temperature = kDefaultTemperature;
    int max_output_tokens = kDefaultMaxOutputTokens;
    std::vector<std::string> fixture_scopes;
};

struct CompletionResult {
    std::string text;
    std::string backend_label;
    std::int64_t latency_ms = 0;
};

struct CompletionLogEntry {
    TemplateId template_id;
    std::string backend_label;
    std::int64_t latency_ms = 0;
    bool ok = true;
};

// The only place prompts are assembled and sent. Each template id may be
// routed to its own backend; unrouted ids use the default backend.
class Gateway {
public:
    explicit Gateway(TemplateRegistry templates, std::shared_ptr<Backend> default_backend = nullptr);

    void route(TemplateId id, std::shared_ptr<Backend> backend);
    bool has_backend(TemplateId id) const;

    std::string render(TemplateId id, const Bindings& bindings) const;

    // Throws MissingPlaceholder, invalid_argument (temperature/max tokens out
    // of range), backend errors, or empty_completion for blank output.
    CompletionResult complete(const CompletionRequest& request) const;

    void set_observer(std::function<void(const CompletionLogEntry&)> observer);

    const TemplateRegistry& templates() const { return templates_; }

private:
    std::shared_ptr<Backend> backend_for(TemplateId id) const;

    TemplateRegistry templates_;
    std::shared_ptr<Backend> default_backend_;
    std::map<TemplateId, std::shared_ptr<Backend>> routes_;
    mutable std::mutex observer_mutex_;
    std::function<void(const CompletionLogEntry&)> observer_;
};

}  // namespace part::gateway

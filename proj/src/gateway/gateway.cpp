#include "gateway/gateway.hpp"

#include <chrono>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/text.hpp"

namespace part::gateway {

Gateway::Gateway(TemplateRegistry templates, std::shared_ptr<Backend> default_backend)
    : templates_(std::move(templates)), default_backend_(std::move(default_backend))
{
}

void Gateway::route(TemplateId id, std::shared_ptr<Backend> backend) { routes_[id] = std::move(backend); }

bool Gateway::has_backend(TemplateId id) const { return backend_for(id) != nullptr; }

std::shared_ptr<Backend> Gateway::backend_for(TemplateId id) const
{
    const auto it = routes_.find(id);
    if (it != routes_.end() && it->second) return it->second;
    return default_backend_;
}

std::string Gateway::render(TemplateId id, const Bindings& bindings) const
{
    return templates_.render(id, bindings);
}

void Gateway::set_observer(std::function<void(const CompletionLogEntry&)> observer)
{
    std::lock_guard lock(observer_mutex_);
    observer_ = std::move(observer);
}

CompletionResult Gateway::complete(const CompletionRequest& req) const
{
    if (!(req.temperature >= 0.0 && req.temperature <= 2.0))
        throw Error(ErrorCode::invalid_argument, "temperature must be in [0, 2]");
    if (req.max_output_tokens <= 0) throw Error(ErrorCode::invalid_argument, "max_output_tokens must be positive");

    BackendCall call;
    call.template_id = req.template_id;
    call.prompt = render(req.template_id, req.bindings);
    call.fixture_key = req.bindings.at(fixture_key_binding(req.template_id));
    call.fixture_scopes = req.fixture_scopes;
    call.temperature = req.temperature;
    call.max_output_tokens = req.max_output_tokens;

    const auto backend = backend_for(req.template_id);
    if (!backend)
        throw Error(ErrorCode::backend_unreachable,
                    std::string("no backend configured for template ") + to_string(req.template_id));

    const auto started = std::chrono::steady_clock::now();
    CompletionResult result;
    result.backend_label = backend->label();
    auto notify = [&](bool ok) {
        result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
        log::debug("completion template=", to_string(req.template_id), " backend=", result.backend_label,
                   " latency_ms=", result.latency_ms, ok ? "" : " failed");
        std::lock_guard lock(observer_mutex_);
        if (observer_) observer_({req.template_id, result.backend_label, result.latency_ms, ok});
    };

    try {
        result.text = backend->complete(call);
    } catch (...) {
        notify(false);
        throw;
    }
    notify(true);
    if (text::trim(result.text).empty())
        throw Error(ErrorCode::empty_completion,
                    std::string("empty completion for template ") + to_string(req.template_id));
    return result;
}

}  // namespace part::gateway

#pragma once

#include <string>
#include <vector>

#include "gateway/prompt_template.hpp"

namespace part::gateway {

// What a backend sees for one completion. The live backend sends `prompt`;
// the scripted backend looks up (template_id, fixture_key) and ignores the rest.
struct BackendCall {
    TemplateId template_id = TemplateId::refiner;
    std::string prompt;
    std::string fixture_key;
    // Optional lookup scopes, most specific first; tried before the bare key.
    std::vector<std::string> fixture_scopes;
    double temperature = 0.9;
    int max_output_tokens = 512;
};

class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string label() const = 0;

    // Returns the raw completion text (possibly empty). Throws part::Error
    // with a backend_* or fixture_miss code on failure.
    virtual std::string complete(const BackendCall& call) = 0;
};

}  // namespace part::gateway

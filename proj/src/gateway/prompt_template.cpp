#include "gateway/prompt_template.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "common/error.hpp"

namespace part::gateway {
namespace {

struct DefaultTemplate {
    const char* id;
    const char* body;
};

// Generated at configure time from assets/templates/v1/*.txt.
constexpr DefaultTemplate kDefaults[] = {
#include "default_templates.inc"
};

bool is_name_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
bool is_name_char(char c) { return is_name_start(c) || (c >= '0' && c <= '9'); }

// Calls on_text for literal runs and on_name for placeholders.
template <typename OnText, typename OnName>
void scan(std::string_view body, OnText on_text, OnName on_name)
{
    std::size_t i = 0;
    while (i < body.size()) {
        const char c = body[i];
        if ((c == '{' || c == '}') && i + 1 < body.size() && body[i + 1] == c) {
            on_text(std::string_view(&body[i], 1));
            i += 2;
            continue;
        }
        if (c == '{' && i + 1 < body.size() && is_name_start(body[i + 1])) {
            std::size_t j = i + 1;
            while (j < body.size() && is_name_char(body[j])) ++j;
            if (j < body.size() && body[j] == '}') {
                on_name(body.substr(i + 1, j - i - 1));
                i = j + 1;
                continue;
            }
        }
        on_text(body.substr(i, 1));
        ++i;
    }
}

}  // namespace

const char* to_string(TemplateId id)
{
    switch (id) {
    case TemplateId::refiner: return "refiner";
    case TemplateId::summarizer: return "summarizer";
    case TemplateId::generator: return "generator";
    case TemplateId::greeting_generator: return "greeting_generator";
    case TemplateId::memory_extractor: return "memory_extractor";
    case TemplateId::judge_retrieval: return "judge_retrieval";
    case TemplateId::judge_generation: return "judge_generation";
    case TemplateId::interest_query: return "interest_query";
    }
    return "refiner";
}

std::optional<TemplateId> parse_template_id(std::string_view s)
{
    for (auto id : kAllTemplates)
        if (s == to_string(id)) return id;
    return std::nullopt;
}

const std::set<std::string>& required_placeholders(TemplateId id)
{
    static const std::map<TemplateId, std::set<std::string>> kRequired = {
        {TemplateId::refiner, {"profile", "context", "message"}},
        {TemplateId::summarizer, {"query", "notes"}},
        {TemplateId::generator, {"profile", "context", "summary", "message"}},
        {TemplateId::greeting_generator, {"profile", "query", "summary"}},
        {TemplateId::memory_extractor, {"context", "message"}},
        {TemplateId::judge_retrieval, {"context", "query", "note_id", "note"}},
        {TemplateId::judge_generation, {"context", "profile", "response"}},
        {TemplateId::interest_query, {"topic", "detail"}},
    };
    return kRequired.at(id);
}

const char* fixture_key_binding(TemplateId id)
{
    switch (id) {
    case TemplateId::refiner: return "message";
    case TemplateId::summarizer: return "query";
    case TemplateId::generator: return "message";
    case TemplateId::greeting_generator: return "query";
    case TemplateId::memory_extractor: return "message";
    case TemplateId::judge_retrieval: return "note_id";
    case TemplateId::judge_generation: return "response";
    case TemplateId::interest_query: return "topic";
    }
    return "message";
}

PromptTemplate::PromptTemplate(TemplateId id, std::string body) : id_(id), body_(std::move(body))
{
    scan(body_, [](std::string_view) {}, [this](std::string_view name) { placeholders_.emplace(name); });
    for (const auto& name : required_placeholders(id_)) {
        if (!placeholders_.count(name))
            throw Error(ErrorCode::invalid_argument,
                        std::string("template ") + to_string(id_) + " lacks required placeholder {" + name + "}");
    }
}

std::string PromptTemplate::render(const Bindings& bindings) const
{
    for (const auto& name : placeholders_)
        if (!bindings.count(name)) throw MissingPlaceholder(name);

    std::string out;
    out.reserve(body_.size() + 256);
    scan(
        body_, [&](std::string_view t) { out.append(t); },
        [&](std::string_view name) { out.append(bindings.at(std::string(name))); });
    return out;
}

TemplateRegistry::TemplateRegistry()
{
    for (const auto& d : kDefaults) {
        const auto id = parse_template_id(d.id);
        if (!id) continue;
        templates_.insert_or_assign(*id, PromptTemplate(*id, d.body));
    }
}

TemplateRegistry TemplateRegistry::from_directory(const std::filesystem::path& dir)
{
    TemplateRegistry reg;
    for (auto id : kAllTemplates) {
        const auto file = dir / (std::string(to_string(id)) + ".txt");
        if (!std::filesystem::exists(file)) continue;
        std::ifstream in(file, std::ios::binary);
        if (!in) throw Error(ErrorCode::io, "cannot read template " + file.string());
        std::ostringstream body;
        body << in.rdbuf();
        reg.put(PromptTemplate(id, body.str()));
    }
    return reg;
}

const PromptTemplate& TemplateRegistry::get(TemplateId id) const
{
    const auto it = templates_.find(id);
    if (it == templates_.end())
        throw Error(ErrorCode::not_found, std::string("no template registered for ") + to_string(id));
    return it->second;
}

void TemplateRegistry::put(PromptTemplate tpl) { templates_.insert_or_assign(tpl.id(), std::move(tpl)); }

std::string TemplateRegistry::render(TemplateId id, const Bindings& bindings) const
{
    return get(id).render(bindings);
}

}  // namespace part::gateway

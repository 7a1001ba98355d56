#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace part::gateway {

enum class TemplateId {
    refiner,
    summarizer,
    generator,
    greeting_generator,
    memory_extractor,
    judge_retrieval,
    judge_generation,
    interest_query,
};

inline constexpr std::array kAllTemplates = {
    TemplateId::refiner,          TemplateId::summarizer,      TemplateId::generator,
    TemplateId::greeting_generator, TemplateId::memory_extractor, TemplateId::judge_retrieval,
    TemplateId::judge_generation, TemplateId::interest_query,
};

const char* to_string(TemplateId id);
std::optional<TemplateId> parse_template_id(std::string_view s);

// Placeholders every body for this id must contain.
const std::set<std::string>& required_placeholders(TemplateId id);

// The binding whose normalized value keys scripted fixtures for this id.
const char* fixture_key_binding(TemplateId id);

using Bindings = std::map<std::string, std::string>;

// Placeholders are written {name} with name = [a-z_][a-z0-9_]*; "{{" and "}}"
// produce literal braces. Any other brace text is copied as-is.
class PromptTemplate {
public:
    // Throws invalid_argument when a required placeholder is absent from body.
    PromptTemplate(TemplateId id, std::string body);

    TemplateId id() const noexcept { return id_; }
    const std::string& body() const noexcept { return body_; }
    const std::set<std::string>& placeholders() const noexcept { return placeholders_; }

    // Throws MissingPlaceholder for the first (alphabetical) unbound name.
    std::string render(const Bindings& bindings) const;

private:
    TemplateId id_;
    std::string body_;
    std::set<std::string> placeholders_;
};

// One template per id. Defaults are the texts shipped in assets/templates/v1,
// compiled in; a directory of <id>.txt files overrides them per id.
class TemplateRegistry {
public:
    TemplateRegistry();  // built-in defaults

    static TemplateRegistry from_directory(const std::filesystem::path& dir);

    const PromptTemplate& get(TemplateId id) const;
    void put(PromptTemplate tpl);

    std::string render(TemplateId id, const Bindings& bindings) const;

private:
    std::map<TemplateId, PromptTemplate> templates_;
};

}  // namespace part::gateway

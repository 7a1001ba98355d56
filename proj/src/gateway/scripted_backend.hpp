#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "gateway/backend.hpp"

namespace part::gateway {

// Deterministic fixture-driven backend.
//
// Fixture file: UTF-8, one record per line, three tab-separated fields
//   template_id <TAB> key <TAB> response
// Blank lines and lines starting with '#' are ignored. In the response field
// the escapes \n, \t and \\ stand for newline, tab and backslash. Keys are
// normalized (case-folded, whitespace collapsed) on load. A key may carry a
// scope prefix "scope|key"; the key "*" matches any key of its template.
class ScriptedBackend : public Backend {
public:
    ScriptedBackend() = default;

    static ScriptedBackend from_file(const std::filesystem::path& path);
    static ScriptedBackend from_string(std::string_view contents);

    void add(TemplateId id, std::string_view key, std::string response);

    std::string label() const override { return "scripted"; }

    // Lookup order: each "scope|key" in call order, then "key", then each
    // "scope|*", then "*".
    std::string complete(const BackendCall& call) override;

    std::size_t size() const { return fixtures_.size(); }

private:
    std::map<std::pair<TemplateId, std::string>, std::string> fixtures_;
};

std::string normalize_fixture_key(std::string_view raw);

}  // namespace part::gateway

#include "gateway/scripted_backend.hpp"

#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "domain/context.hpp"

namespace part::gateway {
namespace {

std::string unescape(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            const char n = s[i + 1];
            if (n == 'n' || n == 't' || n == '\\') {
                out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : '\\');
                ++i;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

}  // namespace

std::string normalize_fixture_key(std::string_view raw) { return normalize_topic(raw); }

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open fixture file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

ScriptedBackend ScriptedBackend::from_string(std::string_view contents)
{
    ScriptedBackend backend;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= contents.size()) {
        auto end = contents.find('\n', start);
        if (end == std::string_view::npos) end = contents.size();
        std::string_view line = contents.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') {
            if (end == contents.size()) break;
            continue;
        }
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string_view::npos)
            throw Error(ErrorCode::invalid_argument,
                        "fixture line " + std::to_string(line_no) + ": expected three tab-separated fields");
        const auto id = parse_template_id(line.substr(0, t1));
        if (!id)
            throw Error(ErrorCode::invalid_argument, "fixture line " + std::to_string(line_no) +
                                                         ": unknown template id '" +
                                                         std::string(line.substr(0, t1)) + "'");
        backend.add(*id, line.substr(t1 + 1, t2 - t1 - 1), unescape(line.substr(t2 + 1)));
        if (end == contents.size()) break;
    }
    return backend;
}

void ScriptedBackend::add(TemplateId id, std::string_view key, std::string response)
{
    fixtures_.insert_or_assign({id, normalize_fixture_key(key)}, std::move(response));
}

std::string ScriptedBackend::complete(const BackendCall& call)
{
    const std::string key = normalize_fixture_key(call.fixture_key);
    auto find = [&](const std::string& k) -> const std::string* {
        const auto it = fixtures_.find({call.template_id, k});
        return it == fixtures_.end() ? nullptr : &it->second;
    };
    for (const auto& scope : call.fixture_scopes) {
        if (scope.empty()) continue;
        if (const auto* hit = find(normalize_fixture_key(scope) + "|" + key)) return *hit;
    }
    if (const auto* hit = find(key)) return *hit;
    for (const auto& scope : call.fixture_scopes) {
        if (scope.empty()) continue;
        if (const auto* hit = find(normalize_fixture_key(scope) + "|*")) return *hit;
    }
    if (const auto* hit = find("*")) return *hit;
    throw FixtureMiss(to_string(call.template_id), key);
}

}  // namespace part::gateway

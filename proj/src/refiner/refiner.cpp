#include "refiner/refiner.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "common/text.hpp"
#include "domain/context.hpp"
#include "profile/profile.hpp"

namespace part::refiner {
namespace {

[[noreturn]] void fail(const std::string& why, std::string_view raw)
{
    throw ParseError(ErrorCode::refiner_parse, "refiner output rejected: " + why, std::string(raw));
}

// Splits on unescaped ';' and resolves the escapes.
std::vector<std::string> split_fields(std::string_view s)
{
    std::vector<std::string> out(1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '\\' && i + 1 < s.size() && (s[i + 1] == ';' || s[i + 1] == '\\')) {
            out.back().push_back(s[++i]);
        } else if (c == ';') {
            out.emplace_back();
        } else {
            out.back().push_back(c);
        }
    }
    return out;
}

std::string escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (c == ';' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string expect_field(const std::string& segment, std::string_view name, std::string_view raw)
{
    // One optional leading space after the separator.
    std::string_view seg(segment);
    if (!seg.empty() && seg.front() == ' ') seg.remove_prefix(1);
    if (seg.substr(0, name.size()) != name || seg.size() <= name.size() || seg[name.size()] != '=')
        fail("expected field '" + std::string(name) + "'", raw);
    return text::trim(seg.substr(name.size() + 1));
}

}  // namespace

IntentDecision::IntentDecision(IntentCategory category, std::optional<RefinedQuery> query, std::string rationale)
    : category_(category), query_(std::move(query)), rationale_(std::move(rationale))
{
    if (category_ == IntentCategory::natural_transition) query_.reset();
    else if (!query_) throw Error(ErrorCode::invalid_argument, "retrieval intent requires a query");
}

IntentDecision parse_decision(std::string_view raw)
{
    const std::string line = text::trim(raw);
    if (line.empty()) fail("empty output", raw);
    if (line.find('\n') != std::string::npos) fail("expected a single line", raw);

    const auto fields = split_fields(line);
    if (fields.size() != 3) fail("expected three fields", raw);

    const auto category = parse_intent_category(expect_field(fields[0], "intent", raw));
    if (!category) fail("unknown intent category", raw);
    const std::string query = expect_field(fields[1], "query", raw);
    const std::string reason = expect_field(fields[2], "reason", raw);

    if (*category == IntentCategory::natural_transition) return IntentDecision::natural(reason);
    if (query.empty()) fail("retrieval intent without a query", raw);
    if (text::length(query) > kMaxQueryLength) fail("query longer than 512 characters", raw);
    return IntentDecision(*category, RefinedQuery(query, QueryOrigin::rewritten), reason);
}

std::string serialize_decision(const IntentDecision& d)
{
    std::string out = "intent=";
    out += to_string(d.category());
    out += "; query=";
    if (d.query()) out += escape(d.query()->text());
    out += "; reason=";
    out += escape(d.rationale());
    return out;
}

IntentDecision refine(const gateway::Gateway& gw, const UserProfile& profile, const DialogueContext& ctx,
                      const std::vector<std::string>& fixture_scopes)
{
    const auto last_user = std::find_if(ctx.messages.rbegin(), ctx.messages.rend(),
                                        [](const Message& m) { return m.role == Role::user; });
    if (last_user == ctx.messages.rend())
        throw Error(ErrorCode::invalid_argument, "refine needs at least one user message");

    gateway::CompletionRequest req;
    req.template_id = gateway::TemplateId::refiner;
    req.bindings = {
        {"profile", profile::render_profile(profile)},
        {"context", render_context(ctx.messages)},
        {"message", last_user->text},
    };
    req.fixture_scopes = fixture_scopes;
    return parse_decision(gw.complete(req).text);
}

}  // namespace part::refiner

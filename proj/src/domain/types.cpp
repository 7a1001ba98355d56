#include "domain/types.hpp"

#include "common/error.hpp"
#include "common/text.hpp"

namespace part {

Message make_message(Role role, std::string text, Timestamp timestamp)
{
    if (text::trim(text).empty()) throw Error(ErrorCode::invalid_argument, "message text is empty");
    return Message{role, std::move(text), timestamp};
}

RefinedQuery::RefinedQuery(std::string_view raw, QueryOrigin origin)
    : text_(text::trim(raw)), origin_(origin)
{
    if (text_.empty()) throw Error(ErrorCode::invalid_argument, "query text is empty");
    if (text::length(text_) > kMaxQueryLength)
        throw Error(ErrorCode::invalid_argument, "query longer than 512 characters");
}

const char* to_string(Role role) { return role == Role::user ? "user" : "assistant"; }

const char* to_string(EntrySource source)
{
    switch (source) {
    case EntrySource::greeting_answer: return "greeting_answer";
    case EntrySource::memory_extraction: return "memory_extraction";
    case EntrySource::manual: return "manual";
    }
    return "manual";
}

const char* to_string(IntentCategory category)
{
    switch (category) {
    case IntentCategory::natural_transition: return "natural_transition";
    case IntentCategory::explicit_retrieval: return "explicit_retrieval";
    case IntentCategory::implicit_retrieval: return "implicit_retrieval";
    }
    return "natural_transition";
}

const char* to_string(QueryOrigin origin)
{
    switch (origin) {
    case QueryOrigin::rewritten: return "rewritten";
    case QueryOrigin::greeting_seed: return "greeting_seed";
    case QueryOrigin::user_message: return "user_message";
    }
    return "rewritten";
}

std::optional<Role> parse_role(std::string_view s)
{
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    return std::nullopt;
}

std::optional<EntrySource> parse_entry_source(std::string_view s)
{
    if (s == "greeting_answer") return EntrySource::greeting_answer;
    if (s == "memory_extraction") return EntrySource::memory_extraction;
    if (s == "manual") return EntrySource::manual;
    return std::nullopt;
}

std::optional<IntentCategory> parse_intent_category(std::string_view s)
{
    if (s == "natural_transition") return IntentCategory::natural_transition;
    if (s == "explicit_retrieval") return IntentCategory::explicit_retrieval;
    if (s == "implicit_retrieval") return IntentCategory::implicit_retrieval;
    return std::nullopt;
}

}  // namespace part

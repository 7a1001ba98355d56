#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace part {

using Timestamp = std::int64_t;  // milliseconds since epoch

inline constexpr std::size_t kDefaultTokenBudget = 2048;
inline constexpr std::size_t kMaxQueryLength = 512;  // code points

enum class Role { user, assistant };

struct Message {
    Role role = Role::user;
    std::string text;
    Timestamp timestamp = 0;

    friend bool operator==(const Message&, const Message&) = default;
};

// Throws invalid_argument when the text is blank.
Message make_message(Role role, std::string text, Timestamp timestamp);

struct DialogueContext {
    std::string session_id;
    std::string user_id;
    std::vector<Message> messages;
    std::size_t token_budget = kDefaultTokenBudget;

    friend bool operator==(const DialogueContext&, const DialogueContext&) = default;
};

enum class EntrySource { greeting_answer, memory_extraction, manual };

struct ProfileEntry {
    std::string topic;
    std::string detail;
    EntrySource source = EntrySource::manual;
    Timestamp updated_at = 0;
    double confidence = 1.0;

    friend bool operator==(const ProfileEntry&, const ProfileEntry&) = default;
};

struct UserProfile {
    std::string user_id;
    std::vector<ProfileEntry> entries;
    std::uint64_t version = 0;

    friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

enum class IntentCategory { natural_transition, explicit_retrieval, implicit_retrieval };

inline bool needs_retrieval(IntentCategory c) { return c != IntentCategory::natural_transition; }

// user_message marks an unrewritten query (the offline harness's raw arm).
enum class QueryOrigin { rewritten, greeting_seed, user_message };

// Non-empty after trimming, at most kMaxQueryLength code points.
class RefinedQuery {
public:
    // Throws invalid_argument when the text violates the invariants.
    RefinedQuery(std::string_view text, QueryOrigin origin);

    const std::string& text() const noexcept { return text_; }
    QueryOrigin origin() const noexcept { return origin_; }

    friend bool operator==(const RefinedQuery&, const RefinedQuery&) = default;

private:
    std::string text_;
    QueryOrigin origin_;
};

const char* to_string(Role role);
const char* to_string(EntrySource source);
const char* to_string(IntentCategory category);
const char* to_string(QueryOrigin origin);

std::optional<Role> parse_role(std::string_view s);
std::optional<EntrySource> parse_entry_source(std::string_view s);
std::optional<IntentCategory> parse_intent_category(std::string_view s);

}  // namespace part

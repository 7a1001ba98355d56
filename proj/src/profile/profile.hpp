#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "domain/types.hpp"
#include "gateway/gateway.hpp"

namespace part::profile {

struct Question {
    std::string text;
    std::string topic_hint;  // may be empty

    friend bool operator==(const Question&, const Question&) = default;
};

// Static greeting questions. Never empty, no duplicate texts.
class QuestionBank {
public:
    // Throws invalid_argument on an empty list or duplicate question text.
    explicit QuestionBank(std::vector<Question> questions);

    // One question per line, optional "#topic" suffix; blank lines skipped.
    static QuestionBank parse(std::string_view contents);
    static QuestionBank load(const std::filesystem::path& path);
    // The bank compiled in from assets/question_bank.txt.
    static const QuestionBank& builtin();

    const std::vector<Question>& questions() const noexcept { return questions_; }
    std::size_t size() const noexcept { return questions_.size(); }

private:
    std::vector<Question> questions_;
};

enum class SeedKind { static_question, profile_interest };

struct GreetingSeed {
    SeedKind kind = SeedKind::static_question;
    std::variant<Question, ProfileEntry> payload;

    const Question* question() const { return std::get_if<Question>(&payload); }
    const ProfileEntry* entry() const { return std::get_if<ProfileEntry>(&payload); }
};

const char* to_string(SeedKind kind);

inline constexpr double kExtractedConfidence = 0.7;

// Parses the extractor line protocol: "NONE", or one or more lines of
// "topic: <t> | detail: <d>" with an optional "| confidence: <x>" field.
// Throws ParseError(extractor_parse) on anything else.
std::vector<ProfileEntry> parse_memory(std::string_view raw, Timestamp updated_at, EntrySource source);

// Runs the memory_extractor template over the context.
std::vector<ProfileEntry> extract_memory(const gateway::Gateway& gw, const DialogueContext& ctx,
                                         EntrySource source = EntrySource::memory_extraction,
                                         const std::vector<std::string>& fixture_scopes = {});

// Dedup by normalize_topic. On collision a strictly newer updated_at replaces
// topic/detail/source/updated_at; confidence becomes max(old, new) either way.
// version increments by exactly one iff anything changed.
UserProfile merge_entries(const UserProfile& profile, const std::vector<ProfileEntry>& fresh);

// Empty profile: uniform draw from the bank. Otherwise: uniform draw from
// the profile entries. Deterministic in rng_seed.
GreetingSeed pick_greeting_seed(const UserProfile& profile, const QuestionBank& bank, std::uint64_t rng_seed);

// Topic plus up to four content words of the detail (stopwords and words
// already in the topic skipped).
RefinedQuery fallback_interest_query(const ProfileEntry& entry);

struct InterestQueryOptions {
    bool local_fallback = true;
    std::vector<std::string> fixture_scopes;
};

// Asks the interest_query template for a search query summarizing the
// entry's core interest. With local_fallback, backend failures (or a missing
// backend) yield fallback_interest_query instead of an error.
RefinedQuery core_interest_query(const gateway::Gateway* gw, const ProfileEntry& entry,
                                 const InterestQueryOptions& options = {});

// "- topic: detail" lines, or a placeholder sentence for an empty profile.
std::string render_profile(const UserProfile& profile);

}  // namespace part::profile

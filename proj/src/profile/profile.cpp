#include "profile/profile.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/random.hpp"
#include "common/text.hpp"
#include "domain/context.hpp"

namespace part::profile {
namespace {

constexpr const char* kBuiltinBank =
#include "default_question_bank.inc"
    ;

const std::set<std::string>& stopwords()
{
    static const std::set<std::string> words = {
        "a",     "an",   "the",  "and",   "or",    "but",   "of",     "to",    "in",     "on",    "at",
        "for",   "with", "from", "about", "into",  "is",    "are",    "was",   "were",   "be",    "been",
        "i",     "me",   "my",   "we",    "our",   "you",   "your",   "he",    "she",    "they",  "his",
        "her",   "their", "it",  "its",   "this",  "that",  "these",  "those", "loves",  "love",  "likes",
        "like",  "enjoys", "enjoy", "prefers", "prefer", "really", "very", "also", "often", "usually",
        "wants", "want", "has",  "have",  "had",   "does",  "do",     "some",  "any",    "lot",   "lots",
    };
    return words;
}

std::string strip_word_punct(std::string_view word)
{
    auto cps = text::decode(word);
    std::size_t b = 0, e = cps.size();
    while (b < e && !text::is_word_char(cps[b]) && !text::is_cjk(cps[b])) ++b;
    while (e > b && !text::is_word_char(cps[e - 1]) && !text::is_cjk(cps[e - 1])) --e;
    return text::encode(std::vector<char32_t>(cps.begin() + static_cast<std::ptrdiff_t>(b),
                                              cps.begin() + static_cast<std::ptrdiff_t>(e)));
}

// Returns the value of "key: value" when the segment has that key.
std::optional<std::string> field(std::string_view segment, std::string_view key)
{
    const std::string seg = text::trim(segment);
    if (!text::starts_with_icase(seg, key)) return std::nullopt;
    std::string_view rest(seg);
    rest.remove_prefix(key.size());
    const std::string trimmed = text::trim(rest);
    if (trimmed.empty() || trimmed.front() != ':') return std::nullopt;
    return text::trim(std::string_view(trimmed).substr(1));
}

}  // namespace

QuestionBank::QuestionBank(std::vector<Question> questions) : questions_(std::move(questions))
{
    if (questions_.empty()) throw Error(ErrorCode::invalid_argument, "question bank is empty");
    std::set<std::string> seen;
    for (const auto& q : questions_) {
        if (text::trim(q.text).empty()) throw Error(ErrorCode::invalid_argument, "blank question in bank");
        if (!seen.insert(q.text).second)
            throw Error(ErrorCode::invalid_argument, "duplicate question in bank: " + q.text);
    }
}

QuestionBank QuestionBank::parse(std::string_view contents)
{
    std::vector<Question> out;
    for (const auto& raw_line : text::split(contents, '\n')) {
        std::string line = text::trim(raw_line);
        if (line.empty()) continue;
        Question q;
        const auto hash = line.rfind('#');
        if (hash != std::string::npos && hash + 1 < line.size() &&
            line.find_first_of(" \t", hash) == std::string::npos) {
            q.topic_hint = line.substr(hash + 1);
            line = text::trim(std::string_view(line).substr(0, hash));
        }
        q.text = line;
        out.push_back(std::move(q));
    }
    return QuestionBank(std::move(out));
}

QuestionBank QuestionBank::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open question bank " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const QuestionBank& QuestionBank::builtin()
{
    static const QuestionBank bank = parse(kBuiltinBank);
    return bank;
}

const char* to_string(SeedKind kind)
{
    return kind == SeedKind::static_question ? "static_question" : "profile_interest";
}

std::vector<ProfileEntry> parse_memory(std::string_view raw, Timestamp updated_at, EntrySource source)
{
    const std::string body = text::trim(raw);
    if (body == "NONE") return {};
    if (body.empty()) throw ParseError(ErrorCode::extractor_parse, "empty extractor output", std::string(raw));

    std::vector<ProfileEntry> out;
    for (const auto& raw_line : text::split(body, '\n')) {
        std::string line = text::trim(raw_line);
        if (line.empty()) continue;
        if (line.rfind("- ", 0) == 0) line = text::trim(std::string_view(line).substr(2));
        const auto parts = text::split(line, '|');
        if (parts.size() < 2 || parts.size() > 3)
            throw ParseError(ErrorCode::extractor_parse, "unparsable extractor line: " + line, std::string(raw));
        const auto topic = field(parts[0], "topic");
        const auto detail = field(parts[1], "detail");
        if (!topic || topic->empty() || !detail)
            throw ParseError(ErrorCode::extractor_parse, "unparsable extractor line: " + line, std::string(raw));
        ProfileEntry e;
        e.topic = text::collapse_whitespace(*topic);
        e.detail = *detail;
        e.source = source;
        e.updated_at = updated_at;
        e.confidence = kExtractedConfidence;
        if (parts.size() == 3) {
            const auto conf = field(parts[2], "confidence");
            if (!conf) throw ParseError(ErrorCode::extractor_parse, "unparsable extractor line: " + line, std::string(raw));
            try {
                e.confidence = std::clamp(std::stod(*conf), 0.0, 1.0);
            } catch (const std::exception&) {
                throw ParseError(ErrorCode::extractor_parse, "bad confidence: " + *conf, std::string(raw));
            }
        }
        out.push_back(std::move(e));
    }
    if (out.empty()) throw ParseError(ErrorCode::extractor_parse, "no entries in extractor output", std::string(raw));
    return out;
}

std::vector<ProfileEntry> extract_memory(const gateway::Gateway& gw, const DialogueContext& ctx, EntrySource source,
                                         const std::vector<std::string>& fixture_scopes)
{
    const auto last_user = std::find_if(ctx.messages.rbegin(), ctx.messages.rend(),
                                        [](const Message& m) { return m.role == Role::user; });
    if (last_user == ctx.messages.rend())
        throw Error(ErrorCode::invalid_argument, "memory extraction needs at least one user message");

    gateway::CompletionRequest req;
    req.template_id = gateway::TemplateId::memory_extractor;
    req.bindings = {{"context", render_context(ctx.messages)}, {"message", last_user->text}};
    req.fixture_scopes = fixture_scopes;
    const auto result = gw.complete(req);
    return parse_memory(result.text, last_user->timestamp, source);
}

UserProfile merge_entries(const UserProfile& profile, const std::vector<ProfileEntry>& fresh)
{
    UserProfile out = profile;
    std::map<std::string, std::size_t> by_topic;
    for (std::size_t i = 0; i < out.entries.size(); ++i) by_topic.emplace(normalize_topic(out.entries[i].topic), i);

    bool changed = false;
    for (const auto& raw : fresh) {
        const std::string key = normalize_topic(raw.topic);
        if (key.empty()) {
            log::warn("merge_entries: skipping entry with empty topic");
            continue;
        }
        ProfileEntry incoming = raw;
        incoming.confidence = std::clamp(incoming.confidence, 0.0, 1.0);
        const auto it = by_topic.find(key);
        if (it == by_topic.end()) {
            by_topic.emplace(key, out.entries.size());
            out.entries.push_back(std::move(incoming));
            changed = true;
            continue;
        }
        ProfileEntry& current = out.entries[it->second];
        ProfileEntry updated = current;
        if (incoming.updated_at > current.updated_at) {
            updated.topic = incoming.topic;
            updated.detail = incoming.detail;
            updated.source = incoming.source;
            updated.updated_at = incoming.updated_at;
        }
        updated.confidence = std::max(current.confidence, incoming.confidence);
        if (!(updated == current)) {
            current = std::move(updated);
            changed = true;
        }
    }
    if (changed) ++out.version;
    return out;
}

GreetingSeed pick_greeting_seed(const UserProfile& profile, const QuestionBank& bank, std::uint64_t rng_seed)
{
    if (profile.entries.empty())
        return {SeedKind::static_question, bank.questions()[seeded_index(rng_seed, bank.size())]};
    return {SeedKind::profile_interest, profile.entries[seeded_index(rng_seed, profile.entries.size())]};
}

RefinedQuery fallback_interest_query(const ProfileEntry& entry)
{
    const std::string topic = text::collapse_whitespace(entry.topic);
    std::set<std::string> seen;
    for (const auto& w : text::split(normalize_topic(topic), ' ')) seen.insert(w);

    std::vector<std::string> words{topic};
    int taken = 0;
    for (const auto& raw : text::split(text::collapse_whitespace(entry.detail), ' ')) {
        if (taken == 4) break;
        const std::string word = strip_word_punct(raw);
        if (word.empty()) continue;
        const std::string key = text::fold_case(word);
        if (stopwords().count(key) || !seen.insert(key).second) continue;
        words.push_back(word);
        ++taken;
    }
    return RefinedQuery(text::truncate(text::join(words, " "), kMaxQueryLength), QueryOrigin::greeting_seed);
}

RefinedQuery core_interest_query(const gateway::Gateway* gw, const ProfileEntry& entry,
                                 const InterestQueryOptions& options)
{
    if (!gw || !gw->has_backend(gateway::TemplateId::interest_query)) {
        if (options.local_fallback) return fallback_interest_query(entry);
        throw Error(ErrorCode::backend_unreachable, "no backend for interest_query");
    }
    gateway::CompletionRequest req;
    req.template_id = gateway::TemplateId::interest_query;
    req.bindings = {{"topic", entry.topic}, {"detail", entry.detail}};
    req.fixture_scopes = options.fixture_scopes;
    try {
        const auto result = gw->complete(req);
        std::string line = text::trim(text::split(text::trim(result.text), '\n').front());
        if (line.size() >= 2 && line.front() == '"' && line.back() == '"') line = line.substr(1, line.size() - 2);
        line = text::truncate(text::trim(line), kMaxQueryLength);
        if (line.empty()) throw Error(ErrorCode::empty_completion, "blank interest query");
        return RefinedQuery(line, QueryOrigin::greeting_seed);
    } catch (const Error& e) {
        if (!options.local_fallback || !e.is_backend_failure()) throw;
        log::info("interest query falls back to local rule: ", e.what());
        return fallback_interest_query(entry);
    }
}

std::string render_profile(const UserProfile& profile)
{
    if (profile.entries.empty()) return "(nothing known yet)";
    std::string out;
    for (const auto& e : profile.entries) {
        if (!out.empty()) out.push_back('\n');
        out.append("- ").append(e.topic);
        if (!text::trim(e.detail).empty()) out.append(": ").append(e.detail);
    }
    return out;
}

}  // namespace part::profile

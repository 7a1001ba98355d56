#include "domain/context.hpp"

#include "common/error.hpp"
#include "common/text.hpp"

namespace part {

std::size_t estimate_tokens(std::string_view s)
{
    std::size_t count = 0;
    bool in_word = false;
    for (char32_t cp : text::decode(s)) {
        if (text::is_space(cp)) {
            in_word = false;
        } else if (text::is_cjk(cp)) {
            ++count;
            in_word = false;
        } else if (!in_word) {
            ++count;
            in_word = true;
        }
    }
    return count;
}

std::string render_context(std::span<const Message> messages)
{
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out.push_back('\n');
        out.append(to_string(m.role)).append(": ").append(m.text);
    }
    return out;
}

namespace {

// "user:" / "assistant:" is one word; the text follows after a space.
std::size_t message_cost(const Message& m) { return 1 + estimate_tokens(m.text); }

}  // namespace

std::size_t context_tokens(std::span<const Message> messages)
{
    std::size_t total = 0;
    for (const auto& m : messages) total += message_cost(m);
    return total;
}

DialogueContext truncate_context(const DialogueContext& ctx)
{
    if (ctx.token_budget == 0) throw Error(ErrorCode::invalid_argument, "token budget must be positive");
    const auto& msgs = ctx.messages;
    if (msgs.empty()) return ctx;

    // Index of the most recent user message; the kept suffix must include it.
    std::size_t must_keep_from = msgs.size() - 1;
    for (std::size_t i = msgs.size(); i-- > 0;) {
        if (msgs[i].role == Role::user) {
            must_keep_from = i;
            break;
        }
    }

    std::size_t total = 0;
    std::size_t first = msgs.size();
    while (first > 0) {
        const std::size_t cost = message_cost(msgs[first - 1]);
        if (total + cost > ctx.token_budget) break;
        total += cost;
        --first;
    }
    if (first > must_keep_from || first == msgs.size())
        throw Error(ErrorCode::most_recent_message_too_large,
                    "most recent message does not fit the token budget of " + std::to_string(ctx.token_budget));
    if (first == 0) return ctx;

    DialogueContext out = ctx;
    out.messages.assign(msgs.begin() + static_cast<std::ptrdiff_t>(first), msgs.end());
    return out;
}

std::string normalize_topic(std::string_view raw)
{
    return text::collapse_whitespace(text::fold_case(raw));
}

}  // namespace part

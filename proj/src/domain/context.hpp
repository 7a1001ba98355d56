#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "domain/types.hpp"

namespace part {

// Deterministic local token estimate: every maximal run of non-space,
// non-CJK characters counts 1, every CJK code point counts 1.
std::size_t estimate_tokens(std::string_view text);

// Renders messages as "role: text" lines, oldest first. This is the exact
// context text placed into prompts.
std::string render_context(std::span<const Message> messages);

// estimate_tokens(render_context(messages)), computed without rendering.
std::size_t context_tokens(std::span<const Message> messages);

// Drops whole messages from the oldest end until the rendered context fits
// token_budget. Throws most_recent_message_too_large when the newest message
// (or the most recent user message) cannot be kept.
DialogueContext truncate_context(const DialogueContext& ctx);

// Case-folded, trimmed, internal whitespace collapsed. Profile dedup key.
std::string normalize_topic(std::string_view raw);

}  // namespace part

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "domain/types.hpp"
#include "gateway/gateway.hpp"

namespace part::refiner {

// Intent category plus, for the two retrieval intents, the rewritten query.
class IntentDecision {
public:
    // Drops any query for natural_transition; throws invalid_argument when a
    // retrieval category comes without a query.
    IntentDecision(IntentCategory category, std::optional<RefinedQuery> query, std::string rationale);

    static IntentDecision natural(std::string rationale)
    {
        return IntentDecision(IntentCategory::natural_transition, std::nullopt, std::move(rationale));
    }

    IntentCategory category() const noexcept { return category_; }
    const std::optional<RefinedQuery>& query() const noexcept { return query_; }
    const std::string& rationale() const noexcept { return rationale_; }

    friend bool operator==(const IntentDecision&, const IntentDecision&) = default;

private:
    IntentCategory category_;
    std::optional<RefinedQuery> query_;
    std::string rationale_;
};

// Line protocol: "intent=<category>; query=<text>; reason=<text>".
// Inside field values a literal ';' or '\' is written "\;" / "\\".
// Throws ParseError(refiner_parse).
IntentDecision parse_decision(std::string_view raw);

// Inverse of parse_decision for any valid decision.
std::string serialize_decision(const IntentDecision& decision);

// One refiner call: classifies intent and rewrites the latest user message
// into a retrieval query, conditioned on profile and (pre-truncated) context.
IntentDecision refine(const gateway::Gateway& gw, const UserProfile& profile, const DialogueContext& ctx,
                      const std::vector<std::string>& fixture_scopes = {});

}  // namespace part::refiner

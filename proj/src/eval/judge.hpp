#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "domain/types.hpp"
#include "gateway/gateway.hpp"
#include "retrieval/index.hpp"

namespace part::eval {

inline constexpr double kJudgeTemperature = 0.0;

struct JudgeLabel {
    std::string note_id;
    int label = 0;          // 0 or 1
    bool judged = true;     // false when the judge call itself failed
    std::string warning;    // non-empty for unparsable verdicts and failures
};

// "PASS" -> 1; "FAIL" or "FAIL:<reason>" -> 0; anything else -> 0 with a
// warning. Case-insensitive, surrounding whitespace ignored.
JudgeLabel parse_retrieval_verdict(std::string_view raw, std::string note_id);

// One judge call per note. A note only passes when the judge asserts all
// three requirements at once. Backend failures mark the note unjudged
// (label 0) instead of aborting. Throws invalid_argument for an empty list.
std::vector<JudgeLabel> judge_retrieval(const gateway::Gateway& gw, const DialogueContext& ctx,
                                        const RefinedQuery& query, const std::vector<retrieval::Note>& notes,
                                        const std::vector<std::string>& fixture_scopes = {});

// Labels as used for P@k. With `strict`, unjudged notes are dropped from the
// list instead of counting as misses.
std::vector<int> labels_for_precision(const std::vector<JudgeLabel>& labels, bool strict);

enum class Dimension { personalization, informativeness, communication };
inline constexpr std::array<Dimension, 3> kDimensions = {Dimension::personalization, Dimension::informativeness,
                                                         Dimension::communication};
const char* to_string(Dimension d);
const char* short_name(Dimension d);

struct GenScore {
    int personalization = 0;
    int informativeness = 0;
    int communication = 0;

    int get(Dimension d) const;
    double average() const { return (personalization + informativeness + communication) / 3.0; }
    friend bool operator==(const GenScore&, const GenScore&) = default;
};

struct GenJudgement {
    GenScore score;
    std::vector<std::string> warnings;
};

// Takes the first three integers in the text, clamping each to 0..3 with a
// warning. Throws ParseError(judge_parse) when fewer than three are present.
GenJudgement parse_generation_scores(std::string_view raw);

GenJudgement judge_generation(const gateway::Gateway& gw, const DialogueContext& ctx, const UserProfile& profile,
                              const std::string& response, const std::vector<std::string>& fixture_scopes = {});

}  // namespace part::eval

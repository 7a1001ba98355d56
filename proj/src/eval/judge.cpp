#include "eval/judge.hpp"

#include <algorithm>
#include <cctype>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/text.hpp"
#include "domain/context.hpp"
#include "profile/profile.hpp"
#include "retrieval/summarizer.hpp"

namespace part::eval {
namespace {

bool word_at(std::string_view s, std::string_view word)
{
    if (!text::starts_with_icase(s, word)) return false;
    if (s.size() == word.size()) return true;
    const auto next = static_cast<unsigned char>(s[word.size()]);
    return !std::isalnum(next) && next != '_';
}

}  // namespace

JudgeLabel parse_retrieval_verdict(std::string_view raw, std::string note_id)
{
    JudgeLabel out;
    out.note_id = std::move(note_id);
    const std::string verdict = text::trim(raw);
    if (word_at(verdict, "PASS")) {
        out.label = 1;
    } else if (word_at(verdict, "FAIL")) {
        out.label = 0;
    } else {
        out.label = 0;
        out.warning = "unparsable retrieval verdict for " + out.note_id + ": " + text::truncate(verdict, 80);
    }
    return out;
}

std::vector<JudgeLabel> judge_retrieval(const gateway::Gateway& gw, const DialogueContext& ctx,
                                        const RefinedQuery& query, const std::vector<retrieval::Note>& notes,
                                        const std::vector<std::string>& fixture_scopes)
{
    if (notes.empty()) throw Error(ErrorCode::invalid_argument, "judge_retrieval needs at least one note");
    const std::string rendered = render_context(ctx.messages);
    std::vector<JudgeLabel> labels;
    labels.reserve(notes.size());
    for (const auto& note : notes) {
        gateway::CompletionRequest req;
        req.template_id = gateway::TemplateId::judge_retrieval;
        req.bindings = {{"context", rendered},
                        {"query", query.text()},
                        {"note_id", note.note_id},
                        {"note", retrieval::render_notes({note})}};
        req.temperature = kJudgeTemperature;
        req.fixture_scopes = fixture_scopes;
        try {
            labels.push_back(parse_retrieval_verdict(gw.complete(req).text, note.note_id));
        } catch (const Error& e) {
            if (!e.is_backend_failure() && e.code() != ErrorCode::empty_completion) throw;
            JudgeLabel failed;
            failed.note_id = note.note_id;
            failed.judged = false;
            failed.warning = "judge call failed for " + note.note_id + ": " + e.what();
            labels.push_back(std::move(failed));
        }
        if (!labels.back().warning.empty()) log::warn(labels.back().warning);
    }
    return labels;
}

std::vector<int> labels_for_precision(const std::vector<JudgeLabel>& labels, bool strict)
{
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
        if (strict && !l.judged) continue;
        out.push_back(l.label);
    }
    return out;
}

const char* to_string(Dimension d)
{
    switch (d) {
    case Dimension::personalization: return "personalization";
    case Dimension::informativeness: return "informativeness";
    case Dimension::communication: return "communication";
    }
    return "personalization";
}

const char* short_name(Dimension d)
{
    switch (d) {
    case Dimension::personalization: return "Pers.";
    case Dimension::informativeness: return "Info.";
    case Dimension::communication: return "Coms.";
    }
    return "Pers.";
}

int GenScore::get(Dimension d) const
{
    switch (d) {
    case Dimension::personalization: return personalization;
    case Dimension::informativeness: return informativeness;
    case Dimension::communication: return communication;
    }
    return 0;
}

GenJudgement parse_generation_scores(std::string_view raw)
{
    std::vector<long long> values;
    for (std::size_t i = 0; i < raw.size() && values.size() < 3;) {
        const bool neg = raw[i] == '-' && i + 1 < raw.size() && std::isdigit(static_cast<unsigned char>(raw[i + 1]));
        if (!neg && !std::isdigit(static_cast<unsigned char>(raw[i]))) {
            ++i;
            continue;
        }
        std::size_t j = neg ? i + 1 : i;
        long long v = 0;
        while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j]))) {
            v = std::min<long long>(v * 10 + (raw[j] - '0'), 1000000);
            ++j;
        }
        values.push_back(neg ? -v : v);
        i = j;
    }
    if (values.size() < 3)
        throw ParseError(ErrorCode::judge_parse, "expected three scores, found " + std::to_string(values.size()),
                         std::string(raw));

    GenJudgement out;
    int clamped[3];
    for (int d = 0; d < 3; ++d) {
        const long long v = values[d];
        clamped[d] = static_cast<int>(std::clamp<long long>(v, 0, 3));
        if (clamped[d] != v)
            out.warnings.push_back(std::string(to_string(kDimensions[d])) + " score " + std::to_string(v) +
                                   " clamped to " + std::to_string(clamped[d]));
    }
    out.score = {clamped[0], clamped[1], clamped[2]};
    return out;
}

GenJudgement judge_generation(const gateway::Gateway& gw, const DialogueContext& ctx, const UserProfile& profile,
                              const std::string& response, const std::vector<std::string>& fixture_scopes)
{
    gateway::CompletionRequest req;
    req.template_id = gateway::TemplateId::judge_generation;
    req.bindings = {{"context", render_context(ctx.messages)},
                    {"profile", profile::render_profile(profile)},
                    {"response", response}};
    req.temperature = kJudgeTemperature;
    req.fixture_scopes = fixture_scopes;
    auto out = parse_generation_scores(gw.complete(req).text);
    for (const auto& w : out.warnings) log::warn(w);
    return out;
}

}  // namespace part::eval

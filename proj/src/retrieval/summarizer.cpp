#include "retrieval/summarizer.hpp"

#include <algorithm>
#include <set>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/text.hpp"

namespace part::retrieval {

std::string render_notes(const std::vector<Note>& notes)
{
    std::string out;
    for (const auto& n : notes) {
        if (!out.empty()) out.append("\n\n");
        out.append("[").append(n.note_id).append("] ").append(n.title).append("\n").append(n.body);
    }
    return out;
}

Summary parse_summary(const std::string& completion, const std::vector<Note>& notes)
{
    Summary s;
    s.text = text::trim(completion);
    if (s.text.empty()) throw Error(ErrorCode::empty_summary, "summarizer returned an empty summary");

    std::set<std::string> known;
    for (const auto& n : notes) known.insert(n.note_id);
    std::set<std::string> cited;

    std::size_t pos = 0;
    while ((pos = s.text.find('[', pos)) != std::string::npos) {
        const auto close = s.text.find(']', pos + 1);
        if (close == std::string::npos) break;
        const std::string id = s.text.substr(pos + 1, close - pos - 1);
        pos = close + 1;
        if (id.empty() || id.find_first_of(" \t\n[") != std::string::npos) continue;
        if (!known.count(id)) {
            if (std::find(s.dropped_citations.begin(), s.dropped_citations.end(), id) == s.dropped_citations.end()) {
                log::warn("summary cites unknown note [", id, "]; dropped");
                s.dropped_citations.push_back(id);
            }
            continue;
        }
        if (cited.insert(id).second) s.source_ids.push_back(id);
    }
    return s;
}

Summary summarize(const gateway::Gateway& gw, const RefinedQuery& query, const std::vector<Note>& notes,
                  const std::vector<std::string>& fixture_scopes)
{
    if (notes.empty()) throw Error(ErrorCode::invalid_argument, "summarize needs at least one note");
    gateway::CompletionRequest req;
    req.template_id = gateway::TemplateId::summarizer;
    req.bindings = {{"query", query.text()}, {"notes", render_notes(notes)}};
    req.fixture_scopes = fixture_scopes;
    std::string completion;
    try {
        completion = gw.complete(req).text;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::empty_completion)
            throw Error(ErrorCode::empty_summary, "summarizer returned an empty summary");
        throw;
    }
    return parse_summary(completion, notes);
}

}  // namespace part::retrieval

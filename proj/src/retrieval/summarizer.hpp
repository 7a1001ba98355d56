#pragma once

#include <string>
#include <vector>

#include "domain/types.hpp"
#include "gateway/gateway.hpp"
#include "retrieval/index.hpp"

namespace part::retrieval {

struct Summary {
    std::string text;
    std::vector<std::string> source_ids;  // subset of the summarized note ids, first-citation order
    std::vector<std::string> dropped_citations;  // cited ids that were not among the notes
};

// "[id] title\nbody" blocks separated by blank lines.
std::string render_notes(const std::vector<Note>& notes);

// Extracts [id] citations from a completion, keeping only known ids.
Summary parse_summary(const std::string& completion, const std::vector<Note>& notes);

// Query-conditioned digest of the top-k notes via the summarizer template.
// Throws invalid_argument for an empty note list and empty_summary when the
// model returns nothing.
Summary summarize(const gateway::Gateway& gw, const RefinedQuery& query, const std::vector<Note>& notes,
                  const std::vector<std::string>& fixture_scopes = {});

}  // namespace part::retrieval

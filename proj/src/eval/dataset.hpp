#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "domain/types.hpp"
#include "orchestrator/trace.hpp"

namespace part::eval {

struct EvalCase {
    std::string case_id;
    orchestrator::Scenario scenario = orchestrator::Scenario::dialogue;
    UserProfile profile;
    DialogueContext context;  // dialogue cases end with a user message
    nlohmann::json gold;      // carried through to the results file untouched
};

// One JSON object per line:
//   {"case_id": "c1", "scenario": "dialogue",
//    "profile": {"user_id": "u1", "entries": [{"topic": "...", "detail": "..."}]},
//    "context": [{"role": "user", "text": "..."}], "gold": {...}}
// Blank lines and lines starting with '#' are skipped. Errors name the line.
std::vector<EvalCase> parse_dataset(std::string_view jsonl);
std::vector<EvalCase> load_dataset(const std::filesystem::path& path);

nlohmann::json to_json(const EvalCase& c);

}  // namespace part::eval

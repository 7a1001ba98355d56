#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "domain/types.hpp"
#include "profile/profile.hpp"
#include "refiner/refiner.hpp"
#include "retrieval/retriever.hpp"
#include "retrieval/summarizer.hpp"

namespace part::orchestrator {

struct PipelineConfig {
    std::size_t k = retrieval::kDefaultTopK;
    std::uint64_t rng_seed = 0;
    bool retrieval_enabled = true;
    double generator_temperature = 0.9;
    std::size_t token_budget = kDefaultTokenBudget;

    // Throws invalid_argument unless k in [1, 50], temperature in [0, 2] and
    // token_budget > 0.
    void validate() const;
};

enum class Scenario { greeting, dialogue };

enum class Stage { seed, interest_query, refine, retrieve, summarize, generate };

// How the reply was produced.
enum class ResponseMode {
    static_question,  // greeting taken verbatim from the question bank
    ungrounded,       // generated from profile + context only
    grounded,         // generated with a retrieval summary
};

struct StageTiming {
    Stage stage;
    double start_ms = 0.0;  // offset from the start of the turn
    double elapsed_ms = 0.0;
};

struct TurnTrace {
    Scenario scenario = Scenario::dialogue;
    std::optional<profile::GreetingSeed> seed;          // greeting only
    std::optional<RefinedQuery> interest_query;         // greeting only
    std::optional<refiner::IntentDecision> decision;    // dialogue only
    std::optional<retrieval::RetrievalResult> retrieval;
    std::optional<retrieval::Summary> summary;
    Message response;
    ResponseMode mode = ResponseMode::ungrounded;
    std::vector<StageTiming> timings;
    std::vector<std::string> warnings;
    bool degraded = false;          // some stage failed and a fallback was used
    std::size_t context_tokens = 0; // rendered context estimate sent with this turn
};

const char* to_string(Scenario s);
const char* to_string(Stage s);
const char* to_string(ResponseMode m);

// Full trace, as written to the transcript log.
nlohmann::json to_json(const TurnTrace& trace);
// Client-facing summary: category, note count, timings.
nlohmann::json summary_json(const TurnTrace& trace);

nlohmann::json to_json(const PipelineConfig& config);
// Missing fields keep the values of `base`.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});

}  // namespace part::orchestrator

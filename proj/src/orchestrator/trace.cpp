#include "orchestrator/trace.hpp"

#include "common/error.hpp"
#include "persistence/codec.hpp"
#include "retrieval/corpus.hpp"

namespace part::orchestrator {

void PipelineConfig::validate() const
{
    if (k < 1 || k > 50) throw Error(ErrorCode::invalid_argument, "k must be in [1, 50]");
    if (!(generator_temperature >= 0.0 && generator_temperature <= 2.0))
        throw Error(ErrorCode::invalid_argument, "generator temperature must be in [0, 2]");
    if (token_budget == 0) throw Error(ErrorCode::invalid_argument, "token budget must be positive");
}

const char* to_string(Scenario s) { return s == Scenario::greeting ? "greeting" : "dialogue"; }

const char* to_string(Stage s)
{
    switch (s) {
    case Stage::seed: return "seed";
    case Stage::interest_query: return "interest_query";
    case Stage::refine: return "refine";
    case Stage::retrieve: return "retrieve";
    case Stage::summarize: return "summarize";
    case Stage::generate: return "generate";
    }
    return "seed";
}

const char* to_string(ResponseMode m)
{
    switch (m) {
    case ResponseMode::static_question: return "static_question";
    case ResponseMode::ungrounded: return "ungrounded";
    case ResponseMode::grounded: return "grounded";
    }
    return "ungrounded";
}

namespace {

nlohmann::json timings_json(const TurnTrace& t)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : t.timings)
        out.push_back({{"stage", to_string(s.stage)}, {"start_ms", s.start_ms}, {"elapsed_ms", s.elapsed_ms}});
    return out;
}

}  // namespace

nlohmann::json to_json(const TurnTrace& t)
{
    nlohmann::json j;
    j["scenario"] = to_string(t.scenario);
    j["response"] = persistence::to_json(t.response);
    j["mode"] = to_string(t.mode);
    j["degraded"] = t.degraded;
    j["context_tokens"] = t.context_tokens;
    j["warnings"] = t.warnings;
    j["timings"] = timings_json(t);
    if (t.seed) {
        nlohmann::json seed = {{"kind", profile::to_string(t.seed->kind)}};
        if (const auto* q = t.seed->question()) seed["question"] = q->text;
        if (const auto* e = t.seed->entry()) seed["entry"] = persistence::to_json(*e);
        j["seed"] = seed;
    }
    if (t.interest_query) j["interest_query"] = t.interest_query->text();
    if (t.decision) {
        j["decision"] = {{"category", to_string(t.decision->category())}, {"reason", t.decision->rationale()}};
        if (t.decision->query()) j["decision"]["query"] = t.decision->query()->text();
    }
    if (t.retrieval) {
        nlohmann::json notes = nlohmann::json::array();
        for (const auto& n : t.retrieval->notes) notes.push_back({{"note_id", n.note.note_id}, {"score", n.score}});
        j["retrieval"] = {{"query", t.retrieval->query.text()}, {"k", t.retrieval->k_requested}, {"notes", notes}};
    }
    if (t.summary) j["summary"] = {{"text", t.summary->text}, {"source_ids", t.summary->source_ids}};
    return j;
}

nlohmann::json summary_json(const TurnTrace& t)
{
    nlohmann::json j;
    j["scenario"] = to_string(t.scenario);
    j["mode"] = to_string(t.mode);
    j["degraded"] = t.degraded;
    j["category"] = t.decision ? nlohmann::json(to_string(t.decision->category())) : nlohmann::json(nullptr);
    j["note_count"] = t.retrieval ? t.retrieval->notes.size() : 0;
    j["timings"] = timings_json(t);
    return j;
}

nlohmann::json to_json(const PipelineConfig& c)
{
    return {{"k", c.k},
            {"rng_seed", c.rng_seed},
            {"retrieval_enabled", c.retrieval_enabled},
            {"generator_temperature", c.generator_temperature},
            {"token_budget", c.token_budget}};
}

PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base)
{
    if (j.is_null()) return base;
    if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "config must be an object");
    try {
        if (j.contains("k")) base.k = j["k"].get<std::size_t>();
        if (j.contains("rng_seed")) base.rng_seed = j["rng_seed"].get<std::uint64_t>();
        if (j.contains("seed")) base.rng_seed = j["seed"].get<std::uint64_t>();
        if (j.contains("retrieval_enabled")) base.retrieval_enabled = j["retrieval_enabled"].get<bool>();
        if (j.contains("generator_temperature")) base.generator_temperature = j["generator_temperature"].get<double>();
        if (j.contains("temperature")) base.generator_temperature = j["temperature"].get<double>();
        if (j.contains("token_budget")) base.token_budget = j["token_budget"].get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("bad config field: ") + e.what());
    }
    base.validate();
    return base;
}

}  // namespace part::orchestrator

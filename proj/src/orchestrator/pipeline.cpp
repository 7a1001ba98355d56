#include "orchestrator/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/random.hpp"
#include "common/text.hpp"
#include "domain/context.hpp"
#include "refiner/refiner.hpp"
#include "retrieval/summarizer.hpp"

namespace part::orchestrator {
namespace {

using SteadyClock = std::chrono::steady_clock;

double ms_between(SteadyClock::time_point a, SteadyClock::time_point b)
{
    return std::chrono::duration<double, std::milli>(b - a).count();
}

// Appends a StageTiming when it goes out of scope, exception or not.
class StageTimer {
public:
    StageTimer(TurnTrace& trace, Stage stage, SteadyClock::time_point turn_start)
        : trace_(trace), stage_(stage), turn_start_(turn_start), started_(SteadyClock::now())
    {
    }
    ~StageTimer()
    {
        const auto done = SteadyClock::now();
        trace_.timings.push_back({stage_, ms_between(turn_start_, started_), ms_between(started_, done)});
    }
    StageTimer(const StageTimer&) = delete;
    StageTimer& operator=(const StageTimer&) = delete;

private:
    TurnTrace& trace_;
    Stage stage_;
    SteadyClock::time_point turn_start_;
    SteadyClock::time_point started_;
};

void degrade(TurnTrace& t, const std::string& why)
{
    log::info("pipeline fallback: ", why);
    t.warnings.push_back(why);
    t.degraded = true;
}

bool recoverable(const Error& e)
{
    return e.is_backend_failure() || e.code() == ErrorCode::refiner_parse || e.code() == ErrorCode::empty_summary ||
           e.code() == ErrorCode::missing_placeholder || e.code() == ErrorCode::invalid_argument;
}

const UserProfile& empty_profile()
{
    static const UserProfile p;
    return p;
}

}  // namespace

const char* to_string(Arm arm)
{
    switch (arm) {
    case Arm::direct: return "direct";
    case Arm::persona: return "persona";
    case Arm::full: return "part";
    }
    return "part";
}

Pipeline::Pipeline(const gateway::Gateway& gateway, std::shared_ptr<const retrieval::Retriever> retriever,
                   const profile::QuestionBank& bank)
    : gateway_(gateway), retriever_(std::move(retriever)), bank_(bank)
{
}

TurnTrace Pipeline::greet(const UserProfile& profile, const PipelineConfig& config, Timestamp now, Arm arm,
                          const std::vector<std::string>& scopes) const
{
    config.validate();
    const auto turn_start = SteadyClock::now();
    TurnTrace t;
    t.scenario = Scenario::greeting;
    t.response.role = Role::assistant;
    t.response.timestamp = now;

    auto generate = [&](const UserProfile& shown, const std::string& query, const std::string& summary) {
        StageTimer timer(t, Stage::generate, turn_start);
        gateway::CompletionRequest req;
        req.template_id = gateway::TemplateId::greeting_generator;
        req.bindings = {{"profile", profile::render_profile(shown)}, {"query", query}, {"summary", summary}};
        req.temperature = config.generator_temperature;
        req.fixture_scopes = scopes;
        t.response.text = text::trim(gateway_.complete(req).text);
    };

    if (arm == Arm::direct) {
        generate(empty_profile(), "", "");
        t.mode = ResponseMode::ungrounded;
        return t;
    }

    auto bank_question = [&](const std::string& why) {
        const auto& q = bank_.questions()[seeded_index(config.rng_seed, bank_.size())];
        t.response.text = q.text;
        t.mode = ResponseMode::static_question;
        if (!why.empty()) degrade(t, why);
    };

    {
        StageTimer timer(t, Stage::seed, turn_start);
        t.seed = profile::pick_greeting_seed(profile, bank_, config.rng_seed);
    }
    if (t.seed->kind == profile::SeedKind::static_question) {
        t.response.text = t.seed->question()->text;
        t.mode = ResponseMode::static_question;
        return t;
    }

    try {
        {
            StageTimer timer(t, Stage::interest_query, turn_start);
            t.interest_query = profile::core_interest_query(&gateway_, *t.seed->entry(), {true, scopes});
        }
        std::string summary_text;
        if (arm == Arm::full && config.retrieval_enabled) {
            {
                StageTimer timer(t, Stage::retrieve, turn_start);
                t.retrieval = retriever_ ? retriever_->retrieve(*t.interest_query, config.k)
                                         : retrieval::RetrievalResult{{}, *t.interest_query, config.k};
            }
            if (t.retrieval->notes.empty()) {
                bank_question("greeting retrieval returned no notes");
                return t;
            }
            std::vector<retrieval::Note> notes;
            for (const auto& n : t.retrieval->notes) notes.push_back(n.note);
            {
                StageTimer timer(t, Stage::summarize, turn_start);
                t.summary = retrieval::summarize(gateway_, *t.interest_query, notes, scopes);
            }
            summary_text = t.summary->text;
        }
        generate(profile, t.interest_query->text(), summary_text);
        t.mode = t.summary ? ResponseMode::grounded : ResponseMode::ungrounded;
    } catch (const Error& e) {
        if (arm != Arm::full) throw;
        t.summary.reset();
        bank_question(std::string("greeting degraded to bank question: ") + e.what());
    }
    return t;
}

TurnTrace Pipeline::respond(const UserProfile& profile, const DialogueContext& ctx, const PipelineConfig& config,
                            Timestamp now, Arm arm, const std::vector<std::string>& scopes) const
{
    config.validate();
    const auto last_user = std::find_if(ctx.messages.rbegin(), ctx.messages.rend(),
                                        [](const Message& m) { return m.role == Role::user; });
    if (last_user == ctx.messages.rend()) throw Error(ErrorCode::invalid_argument, "no user message to respond to");

    const auto turn_start = SteadyClock::now();
    TurnTrace t;
    t.scenario = Scenario::dialogue;
    t.response.role = Role::assistant;
    t.response.timestamp = now;
    t.context_tokens = context_tokens(ctx.messages);
    if (t.context_tokens > ctx.token_budget)
        throw Error(ErrorCode::invalid_state, "context exceeds its token budget; truncate first");

    const std::string rendered_context = render_context(ctx.messages);
    auto generate = [&](const UserProfile& shown, const std::string& summary) {
        StageTimer timer(t, Stage::generate, turn_start);
        gateway::CompletionRequest req;
        req.template_id = gateway::TemplateId::generator;
        req.bindings = {{"profile", profile::render_profile(shown)},
                        {"context", rendered_context},
                        {"summary", summary},
                        {"message", last_user->text}};
        req.temperature = config.generator_temperature;
        req.fixture_scopes = scopes;
        t.response.text = text::trim(gateway_.complete(req).text);
        t.mode = summary.empty() ? ResponseMode::ungrounded : ResponseMode::grounded;
    };

    if (arm == Arm::direct) {
        generate(empty_profile(), "");
        return t;
    }
    if (arm == Arm::persona) {
        generate(profile, "");
        return t;
    }

    if (!config.retrieval_enabled) {
        t.decision = refiner::IntentDecision::natural("retrieval disabled");
        generate(profile, "");
        return t;
    }

    try {
        StageTimer timer(t, Stage::refine, turn_start);
        t.decision = refiner::refine(gateway_, profile, ctx, scopes);
    } catch (const Error& e) {
        if (!recoverable(e)) throw;
        t.decision = refiner::IntentDecision::natural("fallback: refiner failed");
        degrade(t, std::string("refiner failed, answering without retrieval: ") + e.what());
    }

    std::string summary_text;
    if (needs_retrieval(t.decision->category())) {
        const RefinedQuery query = *t.decision->query();
        const std::string attempted =
            std::string(to_string(t.decision->category())) + " for \"" + query.text() + "\"";
        auto fall_back = [&](const std::string& why) {
            degrade(t, why + " (" + attempted + "); answering without retrieval");
            t.decision = refiner::IntentDecision::natural("fallback: " + why);
            t.retrieval.reset();
            t.summary.reset();
            summary_text.clear();
        };
        try {
            StageTimer timer(t, Stage::retrieve, turn_start);
            t.retrieval = retriever_ ? retriever_->retrieve(query, config.k)
                                     : retrieval::RetrievalResult{{}, query, config.k};
        } catch (const Error& e) {
            t.retrieval.reset();
            fall_back(std::string("retrieval failed: ") + e.what());
        }
        if (t.retrieval && t.retrieval->notes.empty()) {
            fall_back("retrieval returned no notes");
        } else if (t.retrieval) {
            std::vector<retrieval::Note> notes;
            for (const auto& n : t.retrieval->notes) notes.push_back(n.note);
            try {
                StageTimer timer(t, Stage::summarize, turn_start);
                t.summary = retrieval::summarize(gateway_, query, notes, scopes);
                summary_text = t.summary->text;
            } catch (const Error& e) {
                if (!recoverable(e)) throw;
                fall_back(std::string("summarizer failed: ") + e.what());
            }
        }
    }

    generate(profile, summary_text);
    return t;
}

}  // namespace part::orchestrator

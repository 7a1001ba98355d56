#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gateway/gateway.hpp"
#include "orchestrator/trace.hpp"
#include "profile/profile.hpp"
#include "retrieval/retriever.hpp"

namespace part::orchestrator {

// Which generation recipe to run. `full` is the engine's behaviour; the other
// two are the baselines the offline harness compares against.
enum class Arm {
    direct,   // no profile, no retrieval
    persona,  // profile, no retrieval
    full,     // profile + intent-routed retrieval and summary
};

const char* to_string(Arm arm);

// Stateless composition of profile seeding, refining, retrieval,
// summarization and generation for one turn.
class Pipeline {
public:
    Pipeline(const gateway::Gateway& gateway, std::shared_ptr<const retrieval::Retriever> retriever,
             const profile::QuestionBank& bank);

    // Session-opening message. Under Arm::full, failures anywhere degrade to
    // the seeded bank question; this never throws for backend trouble.
    TurnTrace greet(const UserProfile& profile, const PipelineConfig& config, Timestamp now, Arm arm = Arm::full,
                    const std::vector<std::string>& fixture_scopes = {}) const;

    // Reply to the newest user message in `ctx` (already truncated). Refiner,
    // retrieval and summarizer failures degrade to an ungrounded reply;
    // generation failures propagate.
    TurnTrace respond(const UserProfile& profile, const DialogueContext& ctx, const PipelineConfig& config,
                      Timestamp now, Arm arm = Arm::full, const std::vector<std::string>& fixture_scopes = {}) const;

    const gateway::Gateway& gateway() const { return gateway_; }
    const profile::QuestionBank& bank() const { return bank_; }

private:
    const gateway::Gateway& gateway_;
    std::shared_ptr<const retrieval::Retriever> retriever_;
    const profile::QuestionBank& bank_;
};

}  // namespace part::orchestrator

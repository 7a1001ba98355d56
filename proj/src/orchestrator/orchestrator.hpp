#pragma once

#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orchestrator/pipeline.hpp"
#include "orchestrator/trace.hpp"
#include "persistence/profile_store.hpp"

namespace part::orchestrator {

using Clock = std::function<Timestamp()>;

Clock system_clock();
// Starts at `start` and advances by `step` ms on every call. Thread-safe.
Clock logical_clock(Timestamp start = 0, Timestamp step = 1000);

enum class SessionState { fresh, active, closed };
const char* to_string(SessionState s);

struct ProfileUpdate {
    UserProfile profile;
    std::vector<std::string> warnings;
};

struct Session {
    DialogueContext context;
    UserProfile profile_snapshot;
    SessionState state = SessionState::fresh;
    PipelineConfig config;
    Timestamp opened_at = 0;
    std::optional<Timestamp> closed_at;
    std::int64_t duration_ms = 0;
    // The first user reply after a greeting is recorded as a greeting answer.
    bool awaiting_greeting_answer = false;
    // Post-response memory extraction; resolved at the start of the next turn.
    std::shared_future<ProfileUpdate> pending_profile;
};

// Wires profile seeding, refining, retrieval and generation into the greeting
// and dialogue scenarios. Sessions are values; every operation returns the
// next session. Callers serialize turns per session.
class Orchestrator {
public:
    // `store` may be null, in which case profile updates only touch the
    // session snapshot.
    Orchestrator(const gateway::Gateway& gateway, std::shared_ptr<const retrieval::Retriever> retriever,
                 profile::QuestionBank bank, persistence::ProfileStore* store, Clock clock = system_clock());

    // Never fails for backend trouble: greetings degrade to a bank question.
    std::pair<Session, TurnTrace> open_session(std::string session_id, const UserProfile& profile,
                                               const PipelineConfig& config) const;

    // One dialogue turn. Throws invalid_state for a closed session,
    // invalid_argument for a blank or out-of-order message,
    // most_recent_message_too_large when the message alone exceeds the
    // budget, and backend errors when generation itself fails.
    std::pair<Session, TurnTrace> step(Session session, Message user_message) const;
    std::pair<Session, TurnTrace> step(Session session, std::string user_text) const;

    // Flushes the pending profile update and closes; closing twice is a no-op.
    Session close_session(Session session) const;

    const Pipeline& pipeline() const { return pipeline_; }
    Timestamp now() const { return clock_(); }

private:
    std::shared_future<ProfileUpdate> schedule_profile_update(const Session& session, EntrySource source) const;
    static void resolve_pending(Session& session, std::vector<std::string>* warnings);

    const gateway::Gateway& gateway_;
    profile::QuestionBank bank_;
    Pipeline pipeline_;
    persistence::ProfileStore* store_;
    Clock clock_;
};

}  // namespace part::orchestrator

#include "orchestrator/orchestrator.hpp"

#include <atomic>
#include <chrono>

#include "common/error.hpp"
#include "common/log.hpp"
#include "domain/context.hpp"

namespace part::orchestrator {

Clock system_clock()
{
    return [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
}

Clock logical_clock(Timestamp start, Timestamp step)
{
    auto next = std::make_shared<std::atomic<Timestamp>>(start);
    return [next, step] { return next->fetch_add(step); };
}

const char* to_string(SessionState s)
{
    switch (s) {
    case SessionState::fresh: return "fresh";
    case SessionState::active: return "active";
    case SessionState::closed: return "closed";
    }
    return "fresh";
}

Orchestrator::Orchestrator(const gateway::Gateway& gateway, std::shared_ptr<const retrieval::Retriever> retriever,
                           profile::QuestionBank bank, persistence::ProfileStore* store, Clock clock)
    : gateway_(gateway),
      bank_(std::move(bank)),
      pipeline_(gateway, std::move(retriever), bank_),
      store_(store),
      clock_(std::move(clock))
{
}

std::pair<Session, TurnTrace> Orchestrator::open_session(std::string session_id, const UserProfile& profile,
                                                         const PipelineConfig& config) const
{
    config.validate();
    Session s;
    s.context.session_id = std::move(session_id);
    s.context.user_id = profile.user_id;
    s.context.token_budget = config.token_budget;
    s.profile_snapshot = profile;
    s.config = config;

    const Timestamp now = clock_();
    s.opened_at = now;
    TurnTrace trace = pipeline_.greet(profile, config, now);
    if (trace.response.text.empty()) {
        // A blank generated greeting still must not leave the user without one.
        trace.response.text = bank_.questions().front().text;
        trace.mode = ResponseMode::static_question;
        trace.degraded = true;
        trace.warnings.push_back("generator returned a blank greeting");
    }
    s.context.messages.push_back(trace.response);
    s.state = SessionState::active;
    s.awaiting_greeting_answer = true;
    return {std::move(s), std::move(trace)};
}

std::pair<Session, TurnTrace> Orchestrator::step(Session session, std::string user_text) const
{
    Timestamp ts = clock_();
    if (!session.context.messages.empty()) ts = std::max(ts, session.context.messages.back().timestamp);
    return step(std::move(session), make_message(Role::user, std::move(user_text), ts));
}

std::pair<Session, TurnTrace> Orchestrator::step(Session session, Message user_message) const
{
    if (session.state == SessionState::closed) throw Error(ErrorCode::invalid_state, "session is closed");
    if (user_message.role != Role::user) throw Error(ErrorCode::invalid_argument, "step expects a user message");
    user_message = make_message(Role::user, std::move(user_message.text), user_message.timestamp);
    if (!session.context.messages.empty() && user_message.timestamp < session.context.messages.back().timestamp)
        throw Error(ErrorCode::invalid_argument, "message timestamp precedes the previous message");

    std::vector<std::string> update_warnings;
    resolve_pending(session, &update_warnings);

    Session next = std::move(session);
    next.context.messages.push_back(user_message);
    next.context = truncate_context(next.context);

    Timestamp now = std::max(clock_(), user_message.timestamp);
    TurnTrace trace = pipeline_.respond(next.profile_snapshot, next.context, next.config, now);
    for (auto& w : update_warnings) trace.warnings.push_back(std::move(w));
    if (trace.response.text.empty()) throw Error(ErrorCode::empty_completion, "generator returned a blank reply");

    next.context.messages.push_back(trace.response);
    next.state = SessionState::active;

    const EntrySource source =
        next.awaiting_greeting_answer ? EntrySource::greeting_answer : EntrySource::memory_extraction;
    next.awaiting_greeting_answer = false;
    next.pending_profile = schedule_profile_update(next, source);
    return {std::move(next), std::move(trace)};
}

Session Orchestrator::close_session(Session session) const
{
    if (session.state == SessionState::closed) return session;
    resolve_pending(session, nullptr);
    session.state = SessionState::closed;
    const auto& msgs = session.context.messages;
    const Timestamp first = msgs.empty() ? session.opened_at : std::min(session.opened_at, msgs.front().timestamp);
    const Timestamp last = msgs.empty() ? session.opened_at : msgs.back().timestamp;
    session.closed_at = last;
    session.duration_ms = last - first;
    return session;
}

std::shared_future<ProfileUpdate> Orchestrator::schedule_profile_update(const Session& session,
                                                                       EntrySource source) const
{
    DialogueContext ctx = session.context;
    try {
        ctx = truncate_context(ctx);
    } catch (const Error&) {
        // extraction works on whatever fits; the turn already succeeded
    }
    UserProfile snapshot = session.profile_snapshot;
    const gateway::Gateway* gw = &gateway_;
    persistence::ProfileStore* store = store_;

    return std::async(std::launch::async,
                      [gw, store, ctx = std::move(ctx), snapshot = std::move(snapshot), source]() -> ProfileUpdate {
                          ProfileUpdate out{snapshot, {}};
                          try {
                              const auto fresh = profile::extract_memory(*gw, ctx, source);
                              if (fresh.empty()) return out;
                              if (store) {
                                  out.profile = store->update(snapshot.user_id, [&](const UserProfile& current) {
                                      return profile::merge_entries(current, fresh);
                                  });
                              } else {
                                  out.profile = profile::merge_entries(snapshot, fresh);
                              }
                          } catch (const std::exception& e) {
                              log::info("profile update skipped: ", e.what());
                              out.warnings.push_back(std::string("profile update skipped: ") + e.what());
                          }
                          return out;
                      })
        .share();
}

void Orchestrator::resolve_pending(Session& session, std::vector<std::string>* warnings)
{
    if (!session.pending_profile.valid()) return;
    const ProfileUpdate& update = session.pending_profile.get();
    session.profile_snapshot = update.profile;
    if (warnings) warnings->insert(warnings->end(), update.warnings.begin(), update.warnings.end());
    session.pending_profile = {};
}

}  // namespace part::orchestrator

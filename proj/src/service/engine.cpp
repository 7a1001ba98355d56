#include "service/engine.hpp"

#include <cstdlib>
#include <random>
#include <sstream>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/text.hpp"
#include "gateway/live_backend.hpp"
#include "gateway/scripted_backend.hpp"
#include "retrieval/corpus.hpp"

namespace part::service {
namespace {

bool parse_flag(const std::string& name, const std::string& v)
{
    const std::string s = text::fold_case(text::trim(v));
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw Error(ErrorCode::invalid_argument, name + ": expected a boolean, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& name, const std::string& v)
{
    std::istringstream in(v);
    T out{};
    in >> out;
    if (!in || !in.eof()) throw Error(ErrorCode::invalid_argument, name + ": not a number: '" + v + "'");
    return out;
}

bool has_role_override(const EnvLookup& env, gateway::TemplateId id)
{
    std::string role = gateway::to_string(id);
    for (char& c : role) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (const char* var : {"PART_LLM_URL__", "PART_LLM_MODEL__", "PART_LLM_KEY__"})
        if (env(var + role)) return true;
    return false;
}

// Counts a call as in flight for the lifetime of the guard.
class InFlight {
public:
    InFlight(std::function<void()> enter, std::function<void()> leave) : leave_(std::move(leave)) { enter(); }
    ~InFlight() { leave_(); }
    InFlight(const InFlight&) = delete;
    InFlight& operator=(const InFlight&) = delete;

private:
    std::function<void()> leave_;
};

}  // namespace

EnvLookup process_env()
{
    return [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
}

void EngineConfig::validate() const
{
    if (backend != "scripted" && backend != "live")
        throw Error(ErrorCode::invalid_argument, "backend must be 'scripted' or 'live', got '" + backend + "'");
    pipeline.validate();
}

EngineConfig EngineConfig::from_env(const EnvLookup& env, EngineConfig c)
{
    if (auto v = env("PART_BACKEND")) c.backend = *v;
    if (auto v = env("PART_FIXTURES")) c.fixtures = *v;
    if (auto v = env("PART_JUDGE_FIXTURES")) c.judge_fixtures = *v;
    if (auto v = env("PART_CORPUS")) c.corpus = *v;
    if (auto v = env("PART_RETRIEVER_URL")) c.retriever_url = *v;
    if (auto v = env("PART_QUESTION_BANK")) c.question_bank = *v;
    if (auto v = env("PART_TEMPLATES")) c.templates_dir = *v;
    if (auto v = env("PART_STORE")) c.store_dir = *v;
    if (auto v = env("PART_K")) c.pipeline.k = parse_number<std::size_t>("PART_K", *v);
    if (auto v = env("PART_SEED")) c.pipeline.rng_seed = parse_number<std::uint64_t>("PART_SEED", *v);
    if (auto v = env("PART_TEMPERATURE"))
        c.pipeline.generator_temperature = parse_number<double>("PART_TEMPERATURE", *v);
    if (auto v = env("PART_RETRIEVAL")) c.pipeline.retrieval_enabled = parse_flag("PART_RETRIEVAL", *v);
    if (auto v = env("PART_DETERMINISTIC")) c.deterministic = parse_flag("PART_DETERMINISTIC", *v);
    return c;
}

EngineConfig EngineConfig::from_env(const EnvLookup& env) { return from_env(env, EngineConfig()); }

EngineConfig EngineConfig::from_json(const nlohmann::json& j) { return from_json(j, EngineConfig()); }

EngineConfig EngineConfig::from_json(const nlohmann::json& j, EngineConfig c)
{
    if (j.is_null()) return c;
    if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "engine config must be a JSON object");
    try {
        auto path = [&](const char* key, std::optional<std::filesystem::path>& slot) {
            if (j.contains(key)) {
                if (j[key].is_null()) slot.reset();
                else slot = j[key].get<std::string>();
            }
        };
        if (j.contains("backend")) c.backend = j["backend"].get<std::string>();
        path("fixtures", c.fixtures);
        path("judge_fixtures", c.judge_fixtures);
        path("corpus", c.corpus);
        path("question_bank", c.question_bank);
        path("templates", c.templates_dir);
        path("store", c.store_dir);
        if (j.contains("retriever_url")) {
            if (j["retriever_url"].is_null()) c.retriever_url.reset();
            else c.retriever_url = j["retriever_url"].get<std::string>();
        }
        if (j.contains("deterministic")) c.deterministic = j["deterministic"].get<bool>();
        if (j.contains("clock_start")) c.clock_start = j["clock_start"].get<Timestamp>();
        c.pipeline = orchestrator::config_from_json(j, c.pipeline);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("engine config: ") + e.what());
    }
    return c;
}

nlohmann::json EngineConfig::to_json() const
{
    auto opt = [](const auto& v) { return v ? nlohmann::json(v->string()) : nlohmann::json(); };
    nlohmann::json j = orchestrator::to_json(pipeline);
    j["backend"] = backend;
    j["fixtures"] = opt(fixtures);
    j["judge_fixtures"] = opt(judge_fixtures);
    j["corpus"] = opt(corpus);
    j["retriever_url"] = retriever_url ? nlohmann::json(*retriever_url) : nlohmann::json();
    j["question_bank"] = opt(question_bank);
    j["templates"] = opt(templates_dir);
    j["store"] = opt(store_dir);
    j["deterministic"] = deterministic;
    j["clock_start"] = clock_start;
    return j;
}

Engine::Engine(EngineConfig config) : config_(std::move(config))
{
    config_.validate();

    auto templates = config_.templates_dir ? gateway::TemplateRegistry::from_directory(*config_.templates_dir)
                                           : gateway::TemplateRegistry();
    std::shared_ptr<gateway::Backend> backend;
    if (config_.backend == "scripted") {
        backend = std::make_shared<gateway::ScriptedBackend>(
            config_.fixtures ? gateway::ScriptedBackend::from_file(*config_.fixtures) : gateway::ScriptedBackend());
    } else {
        auto settings = gateway::LiveBackendSettings::from_env();
        if (!settings) throw Error(ErrorCode::invalid_argument, "live backend needs PART_LLM_URL");
        backend = std::make_shared<gateway::LiveBackend>(*settings);
    }
    gateway_ = std::make_unique<gateway::Gateway>(std::move(templates), backend);

    if (config_.backend == "live") {
        const auto env = process_env();
        for (auto id : gateway::kAllTemplates) {
            if (!has_role_override(env, id)) continue;
            if (auto s = gateway::LiveBackendSettings::from_env(id))
                gateway_->route(id, std::make_shared<gateway::LiveBackend>(*s));
        }
    }
    if (config_.judge_fixtures) {
        auto judge = std::make_shared<gateway::ScriptedBackend>(
            gateway::ScriptedBackend::from_file(*config_.judge_fixtures));
        gateway_->route(gateway::TemplateId::judge_retrieval, judge);
        gateway_->route(gateway::TemplateId::judge_generation, judge);
    }

    if (config_.retriever_url) {
        retriever_ = std::make_shared<retrieval::RemoteRetriever>(*config_.retriever_url);
    } else if (config_.corpus) {
        auto index = std::make_shared<const retrieval::CorpusIndex>(
            retrieval::CorpusIndex::build(retrieval::load_corpus(*config_.corpus)));
        retriever_ = std::make_shared<retrieval::Bm25Retriever>(std::move(index));
    }

    if (config_.store_dir) {
        store_ = std::make_unique<persistence::FileProfileStore>(*config_.store_dir);
        log_ = std::make_unique<persistence::TranscriptLog>(*config_.store_dir / "events.jsonl");
    } else {
        store_ = std::make_unique<persistence::MemoryProfileStore>();
        log_ = std::make_unique<persistence::TranscriptLog>();
    }

    auto bank = config_.question_bank ? profile::QuestionBank::load(*config_.question_bank)
                                      : profile::QuestionBank::builtin();
    auto clock = config_.deterministic ? orchestrator::logical_clock(config_.clock_start)
                                       : orchestrator::system_clock();
    orchestrator_ = std::make_unique<orchestrator::Orchestrator>(*gateway_, retriever_, std::move(bank),
                                                                 store_.get(), std::move(clock));
}

Engine::~Engine()
{
    try {
        shutdown();
    } catch (const std::exception& e) {
        log::error("engine shutdown: ", e.what());
    }
}

std::string Engine::backend_label() const { return config_.backend; }

void Engine::enter()
{
    std::lock_guard lock(drain_mutex_);
    if (stopping_) throw Error(ErrorCode::invalid_state, "engine is shutting down");
    ++in_flight_;
}

void Engine::leave()
{
    std::lock_guard lock(drain_mutex_);
    if (--in_flight_ == 0) drained_.notify_all();
}

std::string Engine::new_session_id()
{
    std::lock_guard lock(sessions_mutex_);
    if (config_.deterministic) return "sess-" + std::to_string(next_session_++);
    static thread_local std::mt19937_64 engine{std::random_device{}()};
    char buf[24];
    std::snprintf(buf, sizeof buf, "sess-%016llx", static_cast<unsigned long long>(engine()));
    return buf;
}

std::shared_ptr<Engine::Slot> Engine::find(const std::string& session_id) const
{
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw Error(ErrorCode::not_found, "no session '" + session_id + "'");
    return it->second;
}

OpenedSession Engine::open_session(const std::string& user_id, const nlohmann::json& overrides)
{
    InFlight guard([this] { enter(); }, [this] { leave(); });
    const std::string uid = text::trim(user_id);
    if (uid.empty()) throw Error(ErrorCode::invalid_argument, "user_id is required");
    orchestrator::PipelineConfig cfg;
    try {
        cfg = orchestrator::config_from_json(overrides.is_null() ? nlohmann::json::object() : overrides,
                                             config_.pipeline);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("config: ") + e.what());
    }
    cfg.validate();

    const UserProfile profile = store_->load(uid);
    const std::string id = new_session_id();
    auto [session, trace] = orchestrator_->open_session(id, profile, cfg);
    log_->append_open(id, uid, session.opened_at);
    log_->append_transcript(id, trace);

    auto slot = std::make_shared<Slot>();
    slot->session = std::move(session);
    slot->next_message = 1;
    {
        std::lock_guard lock(sessions_mutex_);
        sessions_[id] = slot;
    }
    return {id, id + ":0", trace.response, trace};
}

TurnOutcome Engine::post_message(const std::string& session_id, const std::string& text)
{
    InFlight guard([this] { enter(); }, [this] { leave(); });
    auto slot = find(session_id);
    std::unique_lock turn(slot->turn, std::try_to_lock);
    if (!turn.owns_lock())
        throw Error(ErrorCode::conflict, "a turn is already in flight for session '" + session_id + "'");
    if (slot->session.state == orchestrator::SessionState::closed)
        throw Error(ErrorCode::conflict, "session '" + session_id + "' is closed");

    auto [next, trace] = orchestrator_->step(slot->session, text);
    log_->append_transcript(session_id, trace);

    const auto& msgs = next.context.messages;
    TurnOutcome out;
    out.session_id = session_id;
    out.user_message = msgs[msgs.size() - 2];
    out.response = msgs.back();
    out.user_message_id = session_id + ":" + std::to_string(slot->next_message);
    out.response_id = session_id + ":" + std::to_string(slot->next_message + 1);
    out.trace = std::move(trace);
    slot->next_message += 2;
    slot->session = std::move(next);
    return out;
}

ClosedSession Engine::close_session(const std::string& session_id)
{
    InFlight guard([this] { enter(); }, [this] { leave(); });
    auto slot = find(session_id);
    std::unique_lock turn(slot->turn, std::try_to_lock);
    if (!turn.owns_lock())
        throw Error(ErrorCode::conflict, "a turn is already in flight for session '" + session_id + "'");
    if (slot->session.state != orchestrator::SessionState::closed) {
        slot->session = orchestrator_->close_session(std::move(slot->session));
        log_->append_close(session_id, slot->session.opened_at, *slot->session.closed_at,
                           slot->session.duration_ms);
    }
    const auto& s = slot->session;
    return {session_id, s.opened_at, *s.closed_at, s.duration_ms, slot->next_message};
}

UserProfile Engine::profile(const std::string& user_id) const
{
    const std::string uid = text::trim(user_id);
    if (uid.empty()) throw Error(ErrorCode::invalid_argument, "user_id is required");
    return store_->load(uid);
}

eval::EvalReport Engine::run_eval(const std::vector<eval::EvalCase>& dataset, eval::EvalConfig config) const
{
    const eval::EvalDeps deps{*gateway_, retriever_, orchestrator_->pipeline().bank()};
    return eval::run_offline_eval(dataset, config, deps);
}

std::size_t Engine::open_sessions() const
{
    std::lock_guard lock(sessions_mutex_);
    std::size_t n = 0;
    for (const auto& [id, slot] : sessions_) {
        std::unique_lock turn(slot->turn, std::try_to_lock);
        if (!turn.owns_lock() || slot->session.state != orchestrator::SessionState::closed) ++n;
    }
    return n;
}

void Engine::shutdown()
{
    {
        std::unique_lock lock(drain_mutex_);
        if (stopping_) return;
        stopping_ = true;
        drained_.wait(lock, [this] { return in_flight_ == 0; });
    }
    std::map<std::string, std::shared_ptr<Slot>> sessions;
    {
        std::lock_guard lock(sessions_mutex_);
        sessions.swap(sessions_);
    }
    for (auto& [id, slot] : sessions) {
        std::lock_guard turn(slot->turn);
        if (slot->session.state == orchestrator::SessionState::closed) continue;
        slot->session = orchestrator_->close_session(std::move(slot->session));
        log_->append_close(id, slot->session.opened_at, *slot->session.closed_at, slot->session.duration_ms);
    }
}

}  // namespace part::service

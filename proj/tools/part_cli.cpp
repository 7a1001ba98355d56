// Command-line front end: serve, chat, index, eval, profile show.
// Talks to the engine only through the C interface in part/part.h.

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "part/part.h"

namespace {

using nlohmann::json;

struct Failure {
    part_status status;
    std::string message;
};

void check(part_status s)
{
    if (s != PART_OK) throw Failure{s, std::string(part_status_name(s)) + ": " + part_last_error()};
}

// Takes ownership of a string returned by the library.
json take_json(char* raw)
{
    std::unique_ptr<char, decltype(&part_string_free)> owned(raw, &part_string_free);
    return json::parse(owned.get());
}

struct EngineHandle {
    part_engine* engine = nullptr;
    explicit EngineHandle(const json& config) { check(part_engine_create(config.dump().c_str(), &engine)); }
    ~EngineHandle() { part_engine_destroy(engine); }
    EngineHandle(const EngineHandle&) = delete;
    EngineHandle& operator=(const EngineHandle&) = delete;
};

struct CommonOptions {
    std::optional<std::string> backend;
    std::optional<std::string> fixtures;
    std::optional<std::string> judge_fixtures;
    std::optional<std::string> corpus;
    std::optional<std::string> retriever_url;
    std::optional<std::string> store;
    std::optional<std::string> templates;
    std::optional<std::string> question_bank;
    std::optional<std::size_t> k;
    std::optional<std::uint64_t> seed;
    std::optional<double> temperature;
    bool no_retrieval = false;
    std::string log_level = "warn";

    void add_to(CLI::App& app, bool with_judge, bool with_k = true)
    {
        app.add_option("--backend", backend, "LLM backend: scripted or live")
            ->check(CLI::IsMember({"scripted", "live"}));
        app.add_option("--fixtures,--scripted", fixtures, "Scripted backend fixture file");
        if (with_judge) app.add_option("--judge-fixtures", judge_fixtures, "Fixture file for the judge templates");
        app.add_option("--corpus", corpus, "Corpus file (JSON Lines) for local BM25 retrieval");
        app.add_option("--retriever-url", retriever_url, "Remote search endpoint instead of a local corpus");
        app.add_option("--store", store, "Directory for profiles and the event log");
        app.add_option("--templates", templates, "Directory of prompt template overrides");
        app.add_option("--question-bank", question_bank, "Greeting question bank file");
        if (with_k) app.add_option("--k", k, "Notes retrieved per query")->check(CLI::Range(1, 50));
        app.add_option("--seed", seed, "Seed for greeting selection");
        app.add_option("--temperature", temperature, "Generator sampling temperature")->check(CLI::Range(0.0, 2.0));
        app.add_flag("--no-retrieval", no_retrieval, "Answer without retrieval");
        app.add_option("--log-level", log_level, "debug, info, warn, error or off")
            ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));
    }

    // Only flags the user gave; the library fills the rest from PART_*
    // environment variables and then defaults.
    json config() const
    {
        json j = json::object();
        if (backend) j["backend"] = *backend;
        if (fixtures) {
            j["fixtures"] = *fixtures;
            if (!backend) j["backend"] = "scripted";
        }
        if (judge_fixtures) j["judge_fixtures"] = *judge_fixtures;
        if (corpus) j["corpus"] = *corpus;
        if (retriever_url) j["retriever_url"] = *retriever_url;
        if (store) j["store"] = *store;
        if (templates) j["templates"] = *templates;
        if (question_bank) j["question_bank"] = *question_bank;
        if (k) j["k"] = *k;
        if (seed) j["seed"] = *seed;
        if (temperature) j["temperature"] = *temperature;
        if (no_retrieval) j["retrieval_enabled"] = false;
        return j;
    }
};

std::string describe(const json& trace, const char* scenario)
{
    std::string out = scenario;
    if (trace.contains("decision") && trace["decision"].is_object())
        out = trace["decision"].value("category", scenario);
    out += ", " + trace.value("mode", std::string("ungrounded"));
    if (trace.contains("retrieval") && trace["retrieval"].is_object())
        out += ", " + std::to_string(trace["retrieval"]["notes"].size()) + " notes";
    if (trace.value("degraded", false)) out += ", degraded";
    return out;
}

int run_chat(const CommonOptions& common, const std::string& user, const std::optional<std::string>& profile_file,
             const std::optional<std::string>& input_file, bool wall_clock, bool show_traces)
{
    json config = common.config();
    if (!wall_clock) config["deterministic"] = true;
    EngineHandle h(config);

    if (profile_file) {
        std::ifstream in(*profile_file);
        if (!in) throw Failure{PART_ERR_IO, "cannot read " + *profile_file};
        json profile = json::parse(in);
        profile["user_id"] = user;
        char* raw = nullptr;
        check(part_profile_put(h.engine, profile.dump().c_str(), &raw));
        take_json(raw);
    }

    std::ifstream file;
    std::istream* in = &std::cin;
    if (input_file) {
        file.open(*input_file);
        if (!file) throw Failure{PART_ERR_IO, "cannot read " + *input_file};
        in = &file;
    }
    const bool interactive = !input_file && isatty(STDIN_FILENO);

    char* raw = nullptr;
    check(part_session_open(h.engine, user.c_str(), nullptr, &raw));
    const json opened = take_json(raw);
    const std::string sid = opened["session_id"];
    std::cout << "# session " << sid << " (user " << user << ")\n";
    std::cout << "assistant (" << describe(opened["trace"], "greeting") << "): " << opened["greeting"]["text"].get<std::string>()
              << "\n";
    if (show_traces) std::cerr << opened["trace"].dump() << "\n";

    for (std::string line;;) {
        if (interactive) std::cout << "> " << std::flush;
        if (!std::getline(*in, line)) break;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line == "/quit") break;
        if (line == "/profile") {
            check(part_profile_get(h.engine, user.c_str(), &raw));
            std::cout << take_json(raw).dump(2) << "\n";
            continue;
        }
        const part_status s = part_session_post(h.engine, sid.c_str(), line.c_str(), &raw);
        if (s != PART_OK) {
            std::cout << "user: " << line << "\n";
            std::cout << "! " << part_status_name(s) << ": " << part_last_error() << "\n";
            continue;
        }
        const json turn = take_json(raw);
        std::cout << "user: " << turn["user_message"]["text"].get<std::string>() << "\n";
        std::cout << "assistant (" << describe(turn["trace"], "dialogue") << "): "
                  << turn["response"]["text"].get<std::string>() << "\n";
        if (show_traces) std::cerr << turn["trace"].dump() << "\n";
    }

    check(part_session_close(h.engine, sid.c_str(), &raw));
    const json closed = take_json(raw);
    std::cout << "# closed after " << closed["duration_ms"].get<long long>() << " ms\n";
    return 0;
}

int run_index(const std::string& corpus, const std::optional<std::string>& query, std::size_t k)
{
    char* raw = nullptr;
    check(part_corpus_index(corpus.c_str(), query ? query->c_str() : nullptr, k, &raw));
    const json j = take_json(raw);
    std::cout << "indexed " << j["documents"].get<std::size_t>() << " notes from " << corpus << "\n";
    if (query) {
        std::cout << "top " << k << " for \"" << j["query"].get<std::string>() << "\":\n";
        int rank = 0;
        for (const auto& hit : j["results"]) {
            char score[32];
            std::snprintf(score, sizeof score, "%.4f", hit["score"].get<double>());
            std::cout << "  " << ++rank << ". " << hit["note_id"].get<std::string>() << "  " << score << "  "
                      << hit["title"].get<std::string>() << "\n";
        }
    }
    return 0;
}

int run_eval(const CommonOptions& common, const json& request)
{
    json config = common.config();
    config["deterministic"] = true;
    EngineHandle h(config);
    char* raw = nullptr;
    check(part_eval_run(h.engine, request.dump().c_str(), &raw));
    const json results = take_json(raw);
    std::cout << results["report"].get<std::string>();
    if (request.contains("out")) std::cout << "\nwrote report.txt and results.json to " << request["out"].get<std::string>() << "\n";
    return 0;
}

int run_serve(const CommonOptions& common, const json& server)
{
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    EngineHandle h(common.config());
    part_server* srv = nullptr;
    check(part_server_start(h.engine, server.dump().c_str(), &srv));
    std::cerr << "serving on " << server.value("host", std::string("127.0.0.1")) << ":" << part_server_port(srv)
              << "\n";
    int sig = 0;
    sigwait(&signals, &sig);
    std::cerr << "shutting down\n";
    const part_status s = part_server_stop(srv);
    part_server_destroy(srv);
    check(s);
    return 0;
}

int run_profile_show(const CommonOptions& common, const std::string& user)
{
    EngineHandle h(common.config());
    char* raw = nullptr;
    check(part_profile_get(h.engine, user.c_str(), &raw));
    std::cout << take_json(raw).dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"part: proactive chatbot engine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(part_version()));

    CommonOptions common;

    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    common.add_to(*serve, true);
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::string> api_key;
    std::size_t threads = 8;
    serve->add_option("--host", host, "Interface to bind");
    serve->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
    serve->add_option("--api-key", api_key, "Require this bearer token")->envname("PART_API_KEY");
    serve->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));

    auto* chat = app.add_subcommand("chat", "Converse in the terminal");
    common.add_to(*chat, false);
    std::string user = "demo";
    std::optional<std::string> profile_file, input_file;
    bool wall_clock = false, show_traces = false;
    chat->add_option("--user", user, "User id");
    chat->add_option("--profile", profile_file, "Seed the user's profile from a JSON file");
    chat->add_option("--input", input_file, "Read user messages from a file instead of stdin");
    chat->add_flag("--wall-clock", wall_clock, "Timestamp with the system clock instead of a logical one");
    chat->add_flag("--traces", show_traces, "Print each full turn trace to stderr");

    auto* index = app.add_subcommand("index", "Build an index from a corpus file and optionally query it");
    std::string corpus_path;
    std::optional<std::string> query;
    std::size_t index_k = 5;
    index->add_option("corpus", corpus_path, "Corpus file")->required();
    index->add_option("--query", query, "Query to run against the index");
    index->add_option("--k", index_k, "Results to show")->check(CLI::Range(1, 1000));

    auto* eval = app.add_subcommand("eval", "Run the offline evaluation harness");
    common.add_to(*eval, true, false);
    std::string dataset, arms = "raw,rewritten,direct,persona,part", ks = "1,3,5,10";
    std::optional<std::string> out_dir, human;
    bool strict = false;
    std::size_t concurrency = 4;
    eval->add_option("--dataset", dataset, "Dataset file (JSON Lines)")->required();
    eval->add_option("--arms", arms, "Comma-separated arms");
    eval->add_option("--k,--ks", ks, "Comma-separated retrieval depths for P@k and the k sweep");
    eval->add_option("--out", out_dir, "Directory for report.txt, results.json and human sample sheets");
    eval->add_option("--human", human, "Human labels (item_key<TAB>label) for kappa");
    eval->add_flag("--strict", strict, "Drop unjudged notes from P@k instead of counting them as misses");
    eval->add_option("--concurrency", concurrency, "Cases evaluated in parallel")->check(CLI::Range(1, 256));

    auto* profile = app.add_subcommand("profile", "Inspect stored profiles");
    profile->require_subcommand(1);
    auto* show = profile->add_subcommand("show", "Print a user's profile");
    common.add_to(*show, false);
    std::string show_user;
    show->add_option("user", show_user, "User id")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string& level = common.log_level;
        check(part_set_log_level(level.c_str()));
        if (*serve) {
            json s = {{"host", host}, {"port", port}, {"threads", threads}};
            if (api_key) s["api_key"] = *api_key;
            return run_serve(common, s);
        }
        if (*chat) return run_chat(common, user, profile_file, input_file, wall_clock, show_traces);
        if (*index) return run_index(corpus_path, query, index_k);
        if (*eval) {
            json req = {{"dataset", dataset}, {"arms", arms}, {"ks", ks}, {"strict", strict},
                        {"concurrency", concurrency}};
            if (out_dir) req["out"] = *out_dir;
            if (human) req["human_labels"] = *human;
            return run_eval(common, req);
        }
        if (*show) return run_profile_show(common, show_user);
    } catch (const Failure& f) {
        std::cerr << "part: " << f.message << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "part: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include "eval/dataset.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "common/error.hpp"
#include "common/text.hpp"
#include "persistence/codec.hpp"

namespace part::eval {
namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg)
{
    throw Error(ErrorCode::invalid_argument, "dataset line " + std::to_string(line) + ": " + msg);
}

EvalCase case_from_json(const nlohmann::json& j, std::size_t line)
{
    if (!j.is_object()) fail(line, "expected a JSON object");
    EvalCase c;
    c.case_id = text::trim(j.value("case_id", ""));
    if (c.case_id.empty()) fail(line, "missing case_id");

    const std::string scenario = j.value("scenario", "dialogue");
    if (scenario == "greeting") {
        c.scenario = orchestrator::Scenario::greeting;
    } else if (scenario == "dialogue") {
        c.scenario = orchestrator::Scenario::dialogue;
    } else {
        fail(line, "unknown scenario '" + scenario + "'");
    }

    if (j.contains("profile")) {
        nlohmann::json p = j.at("profile");
        if (!p.contains("user_id")) p["user_id"] = c.case_id;
        c.profile = persistence::profile_from_json(p);
    } else {
        c.profile.user_id = c.case_id;
    }

    c.context.session_id = "eval-" + c.case_id;
    c.context.user_id = c.profile.user_id;
    Timestamp ts = 0;
    for (const auto& m : j.value("context", nlohmann::json::array())) {
        const auto role = parse_role(m.value("role", ""));
        if (!role) fail(line, "context message has an unknown role");
        ts = m.value("timestamp", ts + 1000);
        c.context.messages.push_back(make_message(*role, m.value("text", ""), ts));
    }
    if (c.scenario == orchestrator::Scenario::dialogue &&
        (c.context.messages.empty() || c.context.messages.back().role != Role::user))
        fail(line, "dialogue case must end with a user message");
    c.gold = j.value("gold", nlohmann::json());
    return c;
}

}  // namespace

std::vector<EvalCase> parse_dataset(std::string_view jsonl)
{
    std::vector<EvalCase> cases;
    std::map<std::string, std::size_t> seen;
    std::size_t line_no = 0;
    std::istringstream in{std::string(jsonl)};
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const std::string trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto j = nlohmann::json::parse(trimmed, nullptr, false);
        if (j.is_discarded()) fail(line_no, "not valid JSON");
        EvalCase c;
        try {
            c = case_from_json(j, line_no);
        } catch (const Error& e) {
            if (text::starts_with_icase(e.what(), "dataset line")) throw;
            fail(line_no, e.what());
        } catch (const nlohmann::json::exception& e) {
            fail(line_no, e.what());
        }
        auto [it, inserted] = seen.emplace(c.case_id, line_no);
        if (!inserted)
            fail(line_no, "duplicate case_id '" + c.case_id + "' (first seen on line " + std::to_string(it->second) +
                              ")");
        cases.push_back(std::move(c));
    }
    return cases;
}

std::vector<EvalCase> load_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot read dataset " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str());
}

nlohmann::json to_json(const EvalCase& c)
{
    nlohmann::json ctx = nlohmann::json::array();
    for (const auto& m : c.context.messages) ctx.push_back(persistence::to_json(m));
    nlohmann::json j = {{"case_id", c.case_id},
                        {"scenario", orchestrator::to_string(c.scenario)},
                        {"profile", persistence::to_json(c.profile)},
                        {"context", ctx}};
    if (!c.gold.is_null()) j["gold"] = c.gold;
    return j;
}

}  // namespace part::eval

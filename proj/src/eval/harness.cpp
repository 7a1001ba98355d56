#include "eval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/random.hpp"
#include "common/text.hpp"
#include "domain/context.hpp"
#include "eval/metrics.hpp"
#include "refiner/refiner.hpp"

namespace part::eval {
namespace {

using orchestrator::Scenario;

constexpr Scenario kScenarios[] = {Scenario::greeting, Scenario::dialogue};
constexpr EvalArm kRetrievalArms[] = {EvalArm::raw, EvalArm::rewritten};
constexpr EvalArm kGenerationArms[] = {EvalArm::direct, EvalArm::persona, EvalArm::part};

bool has_arm(const EvalConfig& c, EvalArm a) { return std::find(c.arms.begin(), c.arms.end(), a) != c.arms.end(); }

orchestrator::Arm pipeline_arm(EvalArm a)
{
    switch (a) {
    case EvalArm::direct: return orchestrator::Arm::direct;
    case EvalArm::persona: return orchestrator::Arm::persona;
    default: return orchestrator::Arm::full;
    }
}

// Fixture lookup order for one case: "<case>/<tag>" for each tag, then the
// bare case id, then each tag on its own.
std::vector<std::string> scopes_for(const std::string& case_id, const std::vector<std::string>& tags)
{
    std::vector<std::string> out;
    for (const auto& t : tags) out.push_back(case_id + "/" + t);
    out.push_back(case_id);
    for (const auto& t : tags) out.push_back(t);
    return out;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string pad(std::string s, std::size_t width)
{
    const std::size_t len = text::length(s);
    if (len < width) s.append(width - len, ' ');
    return s;
}

std::string tsv_field(std::string_view s)
{
    std::string out(s);
    for (char& c : out)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return out;
}

class CaseRunner {
public:
    CaseRunner(const EvalConfig& config, const EvalDeps& deps)
        : config_(config), deps_(deps), pipeline_(deps.gateway, deps.retriever, deps.bank)
    {
    }

    CaseResult run(const EvalCase& c) const
    {
        CaseResult r;
        r.case_id = c.case_id;
        r.scenario = c.scenario;
        r.gold = c.gold;
        try {
            DialogueContext ctx = c.context;
            ctx.token_budget = config_.pipeline.token_budget;
            if (c.scenario == Scenario::dialogue) {
                ctx = truncate_context(ctx);
                for (EvalArm arm : kRetrievalArms)
                    if (has_arm(config_, arm)) r.retrieval.push_back(retrieval_row(c, ctx, arm, r.warnings));
            }
            for (EvalArm arm : kGenerationArms)
                if (has_arm(config_, arm))
                    r.generation.push_back(generation_row(c, ctx, arm, config_.pipeline.k, {to_string(arm)},
                                                          r.warnings));
            if (has_arm(config_, EvalArm::part)) {
                for (std::size_t k : config_.ks) {
                    if (k == config_.pipeline.k) {
                        r.sweep.push_back(r.generation.back());
                        continue;
                    }
                    const std::string tag = "part@" + std::to_string(k);
                    r.sweep.push_back(generation_row(c, ctx, EvalArm::part, k, {tag, "part"}, r.warnings));
                }
            }
        } catch (const std::exception& e) {
            r.ok = false;
            r.error = e.what();
            r.retrieval.clear();
            r.generation.clear();
            r.sweep.clear();
            log::warn("eval case ", c.case_id, " failed: ", e.what());
        }
        return r;
    }

private:
    RetrievalRow retrieval_row(const EvalCase& c, const DialogueContext& ctx, EvalArm arm,
                               std::vector<std::string>& warnings) const
    {
        const auto scopes = scopes_for(c.case_id, {to_string(arm)});
        const Message& last = ctx.messages.back();
        const RefinedQuery raw(text::truncate(text::trim(last.text), kMaxQueryLength), QueryOrigin::user_message);

        RetrievalRow row;
        row.arm = arm;
        std::optional<RefinedQuery> query;
        if (arm == EvalArm::rewritten) {
            try {
                const auto decision = refiner::refine(deps_.gateway, c.profile, ctx, scopes);
                row.category = decision.category();
                query = decision.query();
            } catch (const Error& e) {
                if (!e.is_backend_failure() && e.code() != ErrorCode::refiner_parse &&
                    e.code() != ErrorCode::empty_completion)
                    throw;
                warnings.push_back(std::string("rewritten: refiner failed, using the user message: ") + e.what());
            }
            row.fell_back_to_message = !query.has_value();
        }
        if (!query) query = raw;
        row.query = query->text();

        const std::size_t k_max = *std::max_element(config_.ks.begin(), config_.ks.end());
        std::vector<retrieval::Note> notes;
        if (deps_.retriever)
            for (auto& n : deps_.retriever->retrieve(*query, k_max).notes) notes.push_back(std::move(n.note));
        if (!notes.empty()) {
            row.labels = judge_retrieval(deps_.gateway, ctx, *query, notes, scopes);
            for (const auto& n : notes) row.note_titles.push_back(n.title);
        }
        for (const auto& l : row.labels)
            if (!l.warning.empty()) warnings.push_back(std::string(to_string(arm)) + ": " + l.warning);
        const auto labels = labels_for_precision(row.labels, config_.strict);
        for (std::size_t k : config_.ks) row.precision[k] = precision_at_k(labels, k);
        return row;
    }

    GenerationRow generation_row(const EvalCase& c, const DialogueContext& ctx, EvalArm arm, std::size_t k,
                                 const std::vector<std::string>& tags, std::vector<std::string>& warnings) const
    {
        const auto scopes = scopes_for(c.case_id, tags);
        orchestrator::PipelineConfig cfg = config_.pipeline;
        cfg.k = k;
        const Timestamp now = ctx.messages.empty() ? 0 : ctx.messages.back().timestamp;
        const auto trace = c.scenario == Scenario::greeting
                               ? pipeline_.greet(c.profile, cfg, now, pipeline_arm(arm), scopes)
                               : pipeline_.respond(c.profile, ctx, cfg, now, pipeline_arm(arm), scopes);
        if (trace.response.text.empty()) throw Error(ErrorCode::empty_completion, "blank response");
        for (const auto& w : trace.warnings) warnings.push_back(tags.front() + ": " + w);

        GenerationRow row;
        row.arm = arm;
        row.k = k;
        row.response = trace.response.text;
        row.mode = trace.mode;
        row.degraded = trace.degraded;
        auto judged = judge_generation(deps_.gateway, ctx, c.profile, row.response, scopes);
        row.score = judged.score;
        for (auto& w : judged.warnings) warnings.push_back(tags.front() + ": " + w);
        return row;
    }

    const EvalConfig& config_;
    const EvalDeps& deps_;
    orchestrator::Pipeline pipeline_;
};

void aggregate(EvalReport& rep)
{
    const auto& cfg = rep.config;
    auto ok_cases = [&](Scenario s) {
        std::vector<const CaseResult*> out;
        for (const auto& c : rep.cases)
            if (c.ok && c.scenario == s) out.push_back(&c);
        return out;
    };

    const auto dialogue = ok_cases(Scenario::dialogue);
    for (EvalArm arm : kRetrievalArms) {
        if (!has_arm(cfg, arm)) continue;
        PrecisionRow row;
        row.arm = arm;
        std::vector<double> columns;
        for (std::size_t k : cfg.ks) {
            std::vector<double> xs;
            for (const auto* c : dialogue)
                for (const auto& r : c->retrieval)
                    if (r.arm == arm) xs.push_back(r.precision.at(k));
            row.cases = xs.size();
            row.precision[k] = mean(xs);
            columns.push_back(row.precision[k]);
        }
        row.average = mean(columns);
        rep.retrieval_table.push_back(row);
    }

    for (Scenario s : kScenarios) {
        const auto cases = ok_cases(s);
        auto& rows = rep.generation_table[s];
        for (EvalArm arm : kGenerationArms) {
            if (!has_arm(cfg, arm)) continue;
            ScoreRow row;
            row.arm = arm;
            std::vector<double> p, i, m;
            for (const auto* c : cases)
                for (const auto& g : c->generation)
                    if (g.arm == arm) {
                        p.push_back(g.score.personalization);
                        i.push_back(g.score.informativeness);
                        m.push_back(g.score.communication);
                    }
            row.cases = p.size();
            row.personalization = mean(p);
            row.informativeness = mean(i);
            row.communication = mean(m);
            row.average = (row.personalization + row.informativeness + row.communication) / 3.0;
            rows.push_back(row);
        }

        if (!has_arm(cfg, EvalArm::part)) continue;
        SweepRow sweep;
        sweep.scenario = s;
        sweep.cases = cases.size();
        for (std::size_t k : cfg.ks) {
            std::vector<double> xs;
            for (const auto* c : cases)
                for (const auto& g : c->sweep)
                    if (g.k == k) xs.push_back(g.score.average());
            sweep.average[k] = mean(xs);
        }
        rep.sweep_table.push_back(sweep);
    }
}

void compute_agreement(EvalReport& rep)
{
    const HumanLabels* human = rep.config.human_labels ? &*rep.config.human_labels : nullptr;
    auto finish = [](std::vector<int>& judge, std::vector<int>& people) {
        Agreement a;
        a.items = judge.size();
        if (!judge.empty()) a.kappa = cohen_kappa(judge, people);
        return a;
    };

    std::vector<int> judge, people;
    if (human)
        for (const auto& c : rep.cases)
            for (const auto& r : c.retrieval)
                for (const auto& l : r.labels) {
                    if (!l.judged) continue;
                    auto it = human->find(retrieval_item_key(c.case_id, r.arm, l.note_id));
                    if (it == human->end()) continue;
                    judge.push_back(l.label);
                    people.push_back(it->second);
                }
    rep.agreement["retrieval"] = finish(judge, people);

    for (Dimension d : kDimensions) {
        judge.clear();
        people.clear();
        if (human)
            for (const auto& c : rep.cases)
                for (const auto& g : c.generation) {
                    auto it = human->find(generation_item_key(c.case_id, g.arm, d));
                    if (it == human->end()) continue;
                    judge.push_back(g.score.get(d));
                    people.push_back(it->second);
                }
        rep.agreement[to_string(d)] = finish(judge, people);
    }
}

void draw_human_sample(EvalReport& rep)
{
    std::vector<std::string> ids;
    for (const auto& c : rep.cases)
        if (c.ok) ids.push_back(c.case_id);
    std::mt19937_64 engine(rep.config.pipeline.rng_seed);
    seeded_shuffle(ids, engine);
    ids.resize(std::min(ids.size(), rep.config.human_sample_size));
    std::sort(ids.begin(), ids.end());
    rep.human_sample = std::move(ids);
}

nlohmann::json k_map(const std::map<std::size_t, double>& m)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = v;
    return j;
}

nlohmann::json to_json(const GenerationRow& g)
{
    return {{"arm", to_string(g.arm)},
            {"k", g.k},
            {"response", g.response},
            {"mode", orchestrator::to_string(g.mode)},
            {"degraded", g.degraded},
            {"scores",
             {{"personalization", g.score.personalization},
              {"informativeness", g.score.informativeness},
              {"communication", g.score.communication}}},
            {"average", g.score.average()}};
}

nlohmann::json to_json(const CaseResult& c)
{
    nlohmann::json j = {{"case_id", c.case_id}, {"scenario", orchestrator::to_string(c.scenario)}, {"ok", c.ok}};
    if (!c.ok) j["error"] = c.error;
    if (!c.gold.is_null()) j["gold"] = c.gold;
    j["warnings"] = c.warnings;
    nlohmann::json retrieval = nlohmann::json::array();
    for (const auto& r : c.retrieval) {
        nlohmann::json notes = nlohmann::json::array();
        for (const auto& l : r.labels) {
            nlohmann::json n = {{"note_id", l.note_id}, {"label", l.label}, {"judged", l.judged}};
            if (!l.warning.empty()) n["warning"] = l.warning;
            notes.push_back(n);
        }
        nlohmann::json row = {{"arm", to_string(r.arm)},
                              {"query", r.query},
                              {"fell_back_to_message", r.fell_back_to_message},
                              {"notes", notes},
                              {"precision", k_map(r.precision)}};
        if (r.category) row["category"] = to_string(*r.category);
        retrieval.push_back(row);
    }
    j["retrieval"] = retrieval;
    j["generation"] = nlohmann::json::array();
    for (const auto& g : c.generation) j["generation"].push_back(to_json(g));
    j["sweep"] = nlohmann::json::array();
    for (const auto& g : c.sweep) j["sweep"].push_back(to_json(g));
    return j;
}

}  // namespace

const char* to_string(EvalArm arm)
{
    switch (arm) {
    case EvalArm::raw: return "raw";
    case EvalArm::rewritten: return "rewritten";
    case EvalArm::direct: return "direct";
    case EvalArm::persona: return "persona";
    case EvalArm::part: return "part";
    }
    return "part";
}

const char* display_name(EvalArm arm)
{
    switch (arm) {
    case EvalArm::raw: return "User query";
    case EvalArm::rewritten: return "Rewritten query";
    case EvalArm::direct: return "Direct generation";
    case EvalArm::persona: return "Persona generation";
    case EvalArm::part: return "Part";
    }
    return "Part";
}

std::optional<EvalArm> parse_eval_arm(std::string_view s)
{
    for (EvalArm a : kAllEvalArms)
        if (s == to_string(a)) return a;
    return std::nullopt;
}

std::vector<EvalArm> parse_arm_list(std::string_view csv)
{
    std::vector<EvalArm> out;
    for (const auto& part : text::split(csv, ',')) {
        const std::string name = text::trim(part);
        if (name.empty()) continue;
        const auto arm = parse_eval_arm(name);
        if (!arm) throw Error(ErrorCode::invalid_argument, "unknown arm '" + name + "'");
        if (std::find(out.begin(), out.end(), *arm) == out.end()) out.push_back(*arm);
    }
    if (out.empty()) throw Error(ErrorCode::invalid_argument, "no arms selected");
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> parse_k_list(std::string_view csv)
{
    std::set<std::size_t> ks;
    for (const auto& part : text::split(csv, ',')) {
        const std::string v = text::trim(part);
        if (v.empty()) continue;
        std::size_t used = 0;
        unsigned long k = 0;
        try {
            k = std::stoul(v, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != v.size() || k == 0) throw Error(ErrorCode::invalid_argument, "bad k value '" + v + "'");
        ks.insert(k);
    }
    if (ks.empty()) throw Error(ErrorCode::invalid_argument, "no k values given");
    return {ks.begin(), ks.end()};
}

HumanLabels parse_human_labels(std::string_view content)
{
    HumanLabels out;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(content, '\n')) {
        ++line_no;
        const std::string line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.rfind('\t');
        if (tab == std::string::npos) tab = line.find_last_of(' ');
        if (tab == std::string::npos)
            throw Error(ErrorCode::invalid_argument, "human labels line " + std::to_string(line_no) +
                                                         ": expected '<item_key><TAB><label>'");
        const std::string key = text::trim(line.substr(0, tab));
        const std::string value = text::trim(line.substr(tab + 1));
        std::size_t used = 0;
        int label = 0;
        try {
            label = std::stoi(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (key.empty() || used == 0 || used != value.size())
            throw Error(ErrorCode::invalid_argument,
                        "human labels line " + std::to_string(line_no) + ": bad label '" + value + "'");
        out[key] = label;
    }
    return out;
}

HumanLabels load_human_labels(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot read human labels " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_human_labels(buf.str());
}

void EvalConfig::validate() const
{
    pipeline.validate();
    if (arms.empty()) throw Error(ErrorCode::invalid_argument, "no arms selected");
    if (ks.empty()) throw Error(ErrorCode::invalid_argument, "no k values given");
    for (std::size_t k : ks)
        if (k == 0 || k > 50) throw Error(ErrorCode::invalid_argument, "k must be in [1, 50]");
    if (concurrency == 0) throw Error(ErrorCode::invalid_argument, "concurrency must be positive");
}

double ScoreRow::get(Dimension d) const
{
    switch (d) {
    case Dimension::personalization: return personalization;
    case Dimension::informativeness: return informativeness;
    case Dimension::communication: return communication;
    }
    return 0.0;
}

std::string retrieval_item_key(const std::string& case_id, EvalArm arm, const std::string& note_id)
{
    return case_id + "/" + to_string(arm) + "/" + note_id;
}

std::string generation_item_key(const std::string& case_id, EvalArm arm, Dimension d)
{
    return case_id + "/" + to_string(arm) + "/" + to_string(d);
}

EvalReport run_offline_eval(const std::vector<EvalCase>& dataset, const EvalConfig& config, const EvalDeps& deps)
{
    config.validate();
    if (dataset.empty()) throw Error(ErrorCode::invalid_argument, "dataset has no cases");

    EvalReport rep;
    rep.config = config;
    std::sort(rep.config.ks.begin(), rep.config.ks.end());
    rep.config.ks.erase(std::unique(rep.config.ks.begin(), rep.config.ks.end()), rep.config.ks.end());

    const CaseRunner runner(rep.config, deps);
    rep.cases.resize(dataset.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < dataset.size(); i = next++) rep.cases[i] = runner.run(dataset[i]);
    };
    const std::size_t workers = std::min(rep.config.concurrency, dataset.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::sort(rep.cases.begin(), rep.cases.end(),
              [](const CaseResult& a, const CaseResult& b) { return a.case_id < b.case_id; });
    for (const auto& c : rep.cases) rep.failed += c.ok ? 0 : 1;
    if (rep.failed * 2 > rep.cases.size()) {
        const auto first = std::find_if(rep.cases.begin(), rep.cases.end(), [](const auto& c) { return !c.ok; });
        throw Error(ErrorCode::eval_aborted, std::to_string(rep.failed) + " of " + std::to_string(rep.cases.size()) +
                                                 " cases failed; first: " + first->case_id + ": " + first->error);
    }

    aggregate(rep);
    compute_agreement(rep);
    draw_human_sample(rep);
    return rep;
}

std::string render_report(const EvalReport& rep)
{
    std::ostringstream out;
    const auto& ks = rep.config.ks;
    out << "Offline evaluation\n";
    out << "cases: " << rep.cases.size() << ", evaluated: " << rep.cases.size() - rep.failed
        << ", failed: " << rep.failed << "\n";
    auto kappa_cell = [&](const std::string& metric) {
        const auto it = rep.agreement.find(metric);
        if (it == rep.agreement.end() || !it->second.kappa) return std::string("-");
        return fmt(*it->second.kappa);
    };
    auto cell = [](std::size_t cases, double v) { return cases == 0 ? std::string("-") : fmt(v); };
    constexpr std::size_t kNameWidth = 20;
    constexpr std::size_t kCellWidth = 8;

    if (!rep.retrieval_table.empty()) {
        out << "\nTable 1. Retrieval precision on dialogue cases\n";
        out << pad("Method", kNameWidth);
        for (std::size_t k : ks) out << pad("P@" + std::to_string(k), kCellWidth);
        out << "Avg\n";
        for (const auto& row : rep.retrieval_table) {
            out << pad(display_name(row.arm), kNameWidth);
            for (std::size_t k : ks) out << pad(cell(row.cases, row.precision.at(k)), kCellWidth);
            out << cell(row.cases, row.average) << "  (n=" << row.cases << ")\n";
        }
        out << "Kappa (vs. human): " << kappa_cell("retrieval") << "\n";
    }

    const bool any_generation = std::any_of(rep.generation_table.begin(), rep.generation_table.end(),
                                            [](const auto& kv) { return !kv.second.empty(); });
    if (any_generation) {
        out << "\nTable 2. Generation quality (0-3)\n";
        out << pad("Method", kNameWidth);
        for (Dimension d : kDimensions) out << pad(short_name(d), kCellWidth);
        out << "Avg\n";
        for (Scenario s : kScenarios) {
            const auto it = rep.generation_table.find(s);
            if (it == rep.generation_table.end()) continue;
            out << (s == Scenario::greeting ? "Greeting" : "Dialogue") << "\n";
            for (const auto& row : it->second) {
                out << pad(display_name(row.arm), kNameWidth);
                for (Dimension d : kDimensions) out << pad(cell(row.cases, row.get(d)), kCellWidth);
                out << cell(row.cases, row.average) << "  (n=" << row.cases << ")\n";
            }
        }
        out << pad("Kappa (vs. human)", kNameWidth);
        for (Dimension d : kDimensions) out << pad(kappa_cell(to_string(d)), kCellWidth);
        out << "-\n";
    }

    if (!rep.sweep_table.empty()) {
        out << "\nTable 3. Part average score by retrieval quantity\n";
        out << pad("Scenario", kNameWidth);
        for (std::size_t k : ks) out << pad("k=" + std::to_string(k), kCellWidth);
        out << "\n";
        for (const auto& row : rep.sweep_table) {
            out << pad(row.scenario == Scenario::greeting ? "Greeting" : "Dialogue", kNameWidth);
            for (std::size_t k : ks) out << pad(cell(row.cases, row.average.at(k)), kCellWidth);
            out << "(n=" << row.cases << ")\n";
        }
    }

    if (rep.failed > 0) {
        out << "\nExcluded cases\n";
        for (const auto& c : rep.cases)
            if (!c.ok) out << "  " << c.case_id << ": " << c.error << "\n";
    }
    return out.str();
}

nlohmann::json results_json(const EvalReport& rep)
{
    nlohmann::json arms = nlohmann::json::array();
    for (EvalArm a : rep.config.arms) arms.push_back(to_string(a));
    nlohmann::json j;
    j["config"] = {{"pipeline", orchestrator::to_json(rep.config.pipeline)},
                   {"arms", arms},
                   {"ks", rep.config.ks},
                   {"strict", rep.config.strict},
                   {"human_sample_size", rep.config.human_sample_size}};
    j["counts"] = {{"cases", rep.cases.size()},
                   {"evaluated", rep.cases.size() - rep.failed},
                   {"failed", rep.failed}};

    nlohmann::json t1 = nlohmann::json::array();
    for (const auto& r : rep.retrieval_table)
        t1.push_back({{"arm", to_string(r.arm)},
                      {"cases", r.cases},
                      {"precision", k_map(r.precision)},
                      {"average", r.average}});
    j["retrieval_table"] = t1;

    nlohmann::json t2 = nlohmann::json::object();
    for (const auto& [s, rows] : rep.generation_table) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows)
            arr.push_back({{"arm", to_string(r.arm)},
                           {"cases", r.cases},
                           {"personalization", r.personalization},
                           {"informativeness", r.informativeness},
                           {"communication", r.communication},
                           {"average", r.average}});
        t2[orchestrator::to_string(s)] = arr;
    }
    j["generation_table"] = t2;

    nlohmann::json t3 = nlohmann::json::array();
    for (const auto& r : rep.sweep_table)
        t3.push_back(
            {{"scenario", orchestrator::to_string(r.scenario)}, {"cases", r.cases}, {"average", k_map(r.average)}});
    j["sweep_table"] = t3;

    nlohmann::json agreement = nlohmann::json::object();
    for (const auto& [metric, a] : rep.agreement)
        agreement[metric] = {{"kappa", a.kappa ? nlohmann::json(*a.kappa) : nlohmann::json()}, {"items", a.items}};
    j["agreement"] = agreement;
    j["human_sample"] = rep.human_sample;

    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : rep.cases) cases.push_back(to_json(c));
    j["cases"] = cases;
    return j;
}

std::string human_sample_retrieval_tsv(const EvalReport& rep)
{
    const std::set<std::string> sample(rep.human_sample.begin(), rep.human_sample.end());
    std::ostringstream out;
    out << "item_key\tcase_id\tarm\tquery\tnote_id\tnote_title\tjudge_label\thuman_label\n";
    for (const auto& c : rep.cases) {
        if (!sample.count(c.case_id)) continue;
        for (const auto& r : c.retrieval)
            for (std::size_t i = 0; i < r.labels.size(); ++i) {
                const auto& l = r.labels[i];
                if (!l.judged) continue;
                out << retrieval_item_key(c.case_id, r.arm, l.note_id) << '\t' << c.case_id << '\t'
                    << to_string(r.arm) << '\t' << tsv_field(r.query) << '\t' << l.note_id << '\t'
                    << tsv_field(i < r.note_titles.size() ? r.note_titles[i] : "") << '\t' << l.label << "\t\n";
            }
    }
    return out.str();
}

std::string human_sample_generation_tsv(const EvalReport& rep)
{
    const std::set<std::string> sample(rep.human_sample.begin(), rep.human_sample.end());
    std::ostringstream out;
    out << "item_key\tcase_id\tscenario\tarm\tdimension\tresponse\tjudge_score\thuman_score\n";
    for (const auto& c : rep.cases) {
        if (!sample.count(c.case_id)) continue;
        for (const auto& g : c.generation)
            for (Dimension d : kDimensions)
                out << generation_item_key(c.case_id, g.arm, d) << '\t' << c.case_id << '\t'
                    << orchestrator::to_string(c.scenario) << '\t' << to_string(g.arm) << '\t' << to_string(d)
                    << '\t' << tsv_field(g.response) << '\t' << g.score.get(d) << "\t\n";
    }
    return out.str();
}

void write_report(const EvalReport& rep, const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create " + out_dir.string() + ": " + ec.message());
    auto write = [&](const std::string& name, const std::string& body) {
        const auto path = out_dir / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << body;
        if (!f) throw Error(ErrorCode::io, "cannot write " + path.string());
    };
    write("report.txt", render_report(rep));
    write("results.json", results_json(rep).dump(2) + "\n");
    write("human_sample_retrieval.tsv", human_sample_retrieval_tsv(rep));
    write("human_sample_generation.tsv", human_sample_generation_tsv(rep));
}

}  // namespace part::eval

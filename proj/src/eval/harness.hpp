#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eval/dataset.hpp"
#include "eval/judge.hpp"
#include "orchestrator/pipeline.hpp"

namespace part::eval {

// raw/rewritten feed the retrieval table; direct/persona/part the generation
// table; part also drives the k sweep.
enum class EvalArm { raw, rewritten, direct, persona, part };

const char* to_string(EvalArm arm);
const char* display_name(EvalArm arm);
std::optional<EvalArm> parse_eval_arm(std::string_view s);
// Comma-separated list; throws invalid_argument for unknown names or an empty list.
std::vector<EvalArm> parse_arm_list(std::string_view csv);
std::vector<std::size_t> parse_k_list(std::string_view csv);

inline const std::vector<EvalArm> kAllEvalArms = {EvalArm::raw, EvalArm::rewritten, EvalArm::direct,
                                                  EvalArm::persona, EvalArm::part};

// Human ratings keyed by item key (see human_sample_* exports).
using HumanLabels = std::map<std::string, int>;

// Two columns per line: "<item_key><TAB><label>". '#' comments allowed.
HumanLabels parse_human_labels(std::string_view text);
HumanLabels load_human_labels(const std::filesystem::path& path);

struct EvalConfig {
    orchestrator::PipelineConfig pipeline;
    std::vector<EvalArm> arms = kAllEvalArms;
    std::vector<std::size_t> ks = {1, 3, 5, 10};
    bool strict = false;  // drop unjudged notes from P@k instead of counting them as misses
    std::size_t concurrency = 4;
    std::size_t human_sample_size = 50;
    std::optional<HumanLabels> human_labels;

    void validate() const;
};

struct RetrievalRow {
    EvalArm arm = EvalArm::raw;
    std::string query;
    std::optional<IntentCategory> category;  // rewritten arm: the refiner's decision
    bool fell_back_to_message = false;       // rewritten arm with no rewritten query
    std::vector<JudgeLabel> labels;
    std::vector<std::string> note_titles;     // parallel to labels
    std::map<std::size_t, double> precision;  // k -> P@k
};

struct GenerationRow {
    EvalArm arm = EvalArm::part;
    std::size_t k = 0;  // retrieval depth used by this run
    std::string response;
    orchestrator::ResponseMode mode = orchestrator::ResponseMode::ungrounded;
    bool degraded = false;
    GenScore score;
};

struct CaseResult {
    std::string case_id;
    orchestrator::Scenario scenario = orchestrator::Scenario::dialogue;
    bool ok = true;
    std::string error;
    std::vector<RetrievalRow> retrieval;
    std::vector<GenerationRow> generation;  // main arms at the configured k
    std::vector<GenerationRow> sweep;       // part arm across ks
    std::vector<std::string> warnings;
    nlohmann::json gold;
};

struct PrecisionRow {
    EvalArm arm = EvalArm::raw;
    std::size_t cases = 0;
    std::map<std::size_t, double> precision;  // mean P@k over cases
    double average = 0.0;                     // mean over the k columns
};

struct ScoreRow {
    EvalArm arm = EvalArm::raw;
    std::size_t cases = 0;
    double personalization = 0.0;
    double informativeness = 0.0;
    double communication = 0.0;
    double average = 0.0;  // mean of the three dimensions

    double get(Dimension d) const;
};

struct SweepRow {
    orchestrator::Scenario scenario = orchestrator::Scenario::dialogue;
    std::size_t cases = 0;
    std::map<std::size_t, double> average;  // k -> mean of the three dimensions
};

struct Agreement {
    std::optional<double> kappa;
    std::size_t items = 0;
};

struct EvalReport {
    EvalConfig config;
    std::vector<CaseResult> cases;  // sorted by case_id
    std::size_t failed = 0;
    std::vector<PrecisionRow> retrieval_table;
    std::map<orchestrator::Scenario, std::vector<ScoreRow>> generation_table;
    std::vector<SweepRow> sweep_table;
    std::map<std::string, Agreement> agreement;  // "retrieval" and each dimension
    std::vector<std::string> human_sample;       // case ids
};

struct EvalDeps {
    const gateway::Gateway& gateway;  // judge templates may be routed to their own backend
    std::shared_ptr<const retrieval::Retriever> retriever;
    const profile::QuestionBank& bank;
};

// Throws invalid_argument for an empty dataset and eval_aborted when more than
// half of the cases fail.
EvalReport run_offline_eval(const std::vector<EvalCase>& dataset, const EvalConfig& config, const EvalDeps& deps);

std::string render_report(const EvalReport& report);
nlohmann::json results_json(const EvalReport& report);

// Tab-separated sheets listing the judged items of the sampled cases, with a
// blank column for the human rating. Item keys match parse_human_labels.
std::string human_sample_retrieval_tsv(const EvalReport& report);
std::string human_sample_generation_tsv(const EvalReport& report);

// report.txt, results.json and the two human sample sheets.
void write_report(const EvalReport& report, const std::filesystem::path& out_dir);

std::string retrieval_item_key(const std::string& case_id, EvalArm arm, const std::string& note_id);
std::string generation_item_key(const std::string& case_id, EvalArm arm, Dimension d);

}  // namespace part::eval

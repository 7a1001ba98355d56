#include "persistence/transcript_log.hpp"

#include <fstream>

#include "common/error.hpp"
#include "common/log.hpp"

namespace part::persistence {

TranscriptLog::TranscriptLog(std::optional<std::filesystem::path> path) : path_(std::move(path))
{
    if (path_ && path_->has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_->parent_path(), ec);
    }
}

void TranscriptLog::append(const nlohmann::json& record)
{
    const std::string line = record.dump() + "\n";
    std::lock_guard lock(mutex_);
    if (!path_) {
        memory_.push_back(line);
        return;
    }
    std::ofstream out(*path_, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::io, "cannot append to " + path_->string());
    out << line;
    out.flush();
    if (!out) throw Error(ErrorCode::io, "short write to " + path_->string());
}

void TranscriptLog::append_open(const std::string& session_id, const std::string& user_id, Timestamp at)
{
    append({{"event", "open"}, {"session_id", session_id}, {"user_id", user_id}, {"at", at}});
}

void TranscriptLog::append_transcript(const std::string& session_id, const orchestrator::TurnTrace& trace)
{
    append({{"event", "turn"}, {"session_id", session_id}, {"trace", orchestrator::to_json(trace)}});
}

void TranscriptLog::append_close(const std::string& session_id, Timestamp opened_at, Timestamp closed_at,
                                 std::int64_t duration_ms)
{
    if (closed_at < opened_at) throw Error(ErrorCode::invalid_argument, "closed_at precedes opened_at");
    append({{"event", "close"},
            {"session_id", session_id},
            {"opened_at", opened_at},
            {"closed_at", closed_at},
            {"duration_ms", duration_ms}});
}

std::vector<nlohmann::json> TranscriptLog::records() const
{
    std::vector<nlohmann::json> out;
    std::lock_guard lock(mutex_);
    auto take = [&](const std::string& line, std::size_t line_no) {
        if (line.empty() || line == "\n") return;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            log::warn("transcript log line ", line_no, " is not valid JSON; skipped");
            return;
        }
        out.push_back(std::move(j));
    };
    if (!path_) {
        for (std::size_t i = 0; i < memory_.size(); ++i) take(memory_[i], i + 1);
        return out;
    }
    std::ifstream in(*path_, std::ios::binary);
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) take(line, ++line_no);
    return out;
}

std::optional<TranscriptRecord> TranscriptLog::load_transcript(const std::string& session_id) const
{
    std::optional<TranscriptRecord> rec;
    for (const auto& r : records()) {
        if (r.value("session_id", "") != session_id) continue;
        const std::string event = r.value("event", "");
        if (!rec) {
            rec.emplace();
            rec->session_id = session_id;
        }
        if (event == "open") {
            rec->user_id = r.value("user_id", "");
            rec->opened_at = r.value("at", Timestamp{0});
        } else if (event == "turn") {
            rec->turns.push_back(r.value("trace", nlohmann::json::object()));
        } else if (event == "close") {
            rec->opened_at = r.value("opened_at", rec->opened_at);
            rec->closed_at = r.value("closed_at", Timestamp{0});
            rec->duration_ms = r.value("duration_ms", std::int64_t{0});
        }
    }
    return rec;
}

DurationStats TranscriptLog::mean_session_duration(TimeRange range) const
{
    DurationStats stats;
    double total_ms = 0.0;
    for (const auto& r : records()) {
        if (r.value("event", "") != "close") continue;
        const Timestamp opened = r.value("opened_at", Timestamp{0});
        if (opened < range.from || opened >= range.to) continue;
        total_ms += static_cast<double>(r.value("duration_ms", std::int64_t{0}));
        ++stats.sessions;
    }
    if (stats.sessions == 0) return stats;
    stats.empty = false;
    stats.mean_seconds = total_ms / static_cast<double>(stats.sessions) / 1000.0;
    return stats;
}

}  // namespace part::persistence

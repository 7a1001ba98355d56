#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "domain/types.hpp"
#include "orchestrator/trace.hpp"

namespace part::persistence {

struct TranscriptRecord {
    std::string session_id;
    std::string user_id;
    std::vector<nlohmann::json> turns;  // full TurnTrace records, in order
    Timestamp opened_at = 0;
    std::optional<Timestamp> closed_at;
    std::optional<std::int64_t> duration_ms;
};

struct TimeRange {
    Timestamp from = std::numeric_limits<Timestamp>::min();  // inclusive, on opened_at
    Timestamp to = std::numeric_limits<Timestamp>::max();    // exclusive
};

struct DurationStats {
    double mean_seconds = 0.0;
    std::size_t sessions = 0;
    bool empty = true;
};

// Append-only event log, one JSON record per line:
//   {"event":"open","session_id":..,"user_id":..,"at":..}
//   {"event":"turn","session_id":..,"trace":{...}}
//   {"event":"close","session_id":..,"opened_at":..,"closed_at":..,"duration_ms":..}
// Without a path the log lives in memory only.
class TranscriptLog {
public:
    explicit TranscriptLog(std::optional<std::filesystem::path> path = std::nullopt);

    void append_open(const std::string& session_id, const std::string& user_id, Timestamp at);
    void append_transcript(const std::string& session_id, const orchestrator::TurnTrace& trace);
    void append_close(const std::string& session_id, Timestamp opened_at, Timestamp closed_at,
                      std::int64_t duration_ms);

    std::optional<TranscriptRecord> load_transcript(const std::string& session_id) const;

    // Mean duration of closed sessions whose opened_at falls in range.
    DurationStats mean_session_duration(TimeRange range = {}) const;

    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

private:
    void append(const nlohmann::json& record);
    std::vector<nlohmann::json> records() const;

    std::optional<std::filesystem::path> path_;
    mutable std::mutex mutex_;
    std::vector<std::string> memory_;
};

}  // namespace part::persistence

#include "common/error.hpp"

namespace part {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_state: return "invalid_state";
    case ErrorCode::most_recent_message_too_large: return "most_recent_message_too_large";
    case ErrorCode::missing_placeholder: return "missing_placeholder";
    case ErrorCode::backend_unreachable: return "backend_unreachable";
    case ErrorCode::backend_rejected: return "backend_rejected";
    case ErrorCode::fixture_miss: return "fixture_miss";
    case ErrorCode::empty_completion: return "empty_completion";
    case ErrorCode::extractor_parse: return "extractor_parse";
    case ErrorCode::refiner_parse: return "refiner_parse";
    case ErrorCode::duplicate_note_id: return "duplicate_note_id";
    case ErrorCode::corpus_format: return "corpus_format";
    case ErrorCode::empty_summary: return "empty_summary";
    case ErrorCode::judge_parse: return "judge_parse";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::storage_corrupt: return "storage_corrupt";
    case ErrorCode::stale_version: return "stale_version";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::eval_aborted: return "eval_aborted";
    case ErrorCode::io: return "io";
    }
    return "unknown";
}

}  // namespace part

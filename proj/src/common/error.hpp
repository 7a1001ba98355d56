#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace part {

enum class ErrorCode {
    invalid_argument,
    invalid_state,
    most_recent_message_too_large,
    missing_placeholder,
    backend_unreachable,
    backend_rejected,
    fixture_miss,
    empty_completion,
    extractor_parse,
    refiner_parse,
    duplicate_note_id,
    corpus_format,
    empty_summary,
    judge_parse,
    length_mismatch,
    storage_corrupt,
    stale_version,
    not_found,
    conflict,
    eval_aborted,
    io,
};

const char* to_string(ErrorCode code);

// Every failure the engine raises is a part::Error; the code is what callers
// branch on, the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    // True for failures of the model backend itself (as opposed to parse
    // failures of what it returned).
    bool is_backend_failure() const noexcept
    {
        return code_ == ErrorCode::backend_unreachable || code_ == ErrorCode::backend_rejected ||
               code_ == ErrorCode::fixture_miss || code_ == ErrorCode::empty_completion;
    }

private:
    ErrorCode code_;
};

class MissingPlaceholder : public Error {
public:
    explicit MissingPlaceholder(std::string name)
        : Error(ErrorCode::missing_placeholder, "missing placeholder: " + name), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class BackendRejected : public Error {
public:
    BackendRejected(int status, const std::string& detail)
        : Error(ErrorCode::backend_rejected,
                "backend rejected request with status " + std::to_string(status) +
                    (detail.empty() ? "" : ": " + detail)),
          status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

class FixtureMiss : public Error {
public:
    FixtureMiss(std::string template_id, std::string key)
        : Error(ErrorCode::fixture_miss, "no fixture for (" + template_id + ", \"" + key + "\")"),
          template_id_(std::move(template_id)), key_(std::move(key)) {}
    const std::string& template_id() const noexcept { return template_id_; }
    const std::string& key() const noexcept { return key_; }

private:
    std::string template_id_;
    std::string key_;
};

// Parse failures keep the offending model output for logs.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, const std::string& what, std::string raw)
        : Error(code, what), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

class StaleVersion : public Error {
public:
    StaleVersion(std::uint64_t stored, std::uint64_t attempted)
        : Error(ErrorCode::stale_version, "stale profile version " + std::to_string(attempted) +
                                              " (stored " + std::to_string(stored) + ")"),
          stored_(stored), attempted_(attempted) {}
    std::uint64_t stored() const noexcept { return stored_; }
    std::uint64_t attempted() const noexcept { return attempted_; }

private:
    std::uint64_t stored_;
    std::uint64_t attempted_;
};

}  // namespace part

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "retrieval/index.hpp"

namespace part::retrieval {

// Corpus file: UTF-8 JSON Lines, one note per line:
//   {"note_id": "n1", "title": "...", "body": "...", "tags": ["..."]}
// Blank lines are skipped. Malformed records, blank bodies and duplicate ids
// are rejected with corpus_format / duplicate_note_id errors that name the line.
std::vector<Note> parse_corpus(std::string_view contents);
std::vector<Note> load_corpus(const std::filesystem::path& path);

nlohmann::json to_json(const Note& note);
// Throws corpus_format with `where` prefixed to the message.
Note note_from_json(const nlohmann::json& j, const std::string& where);

}  // namespace part::retrieval

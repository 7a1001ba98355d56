#include "retrieval/corpus.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "common/error.hpp"
#include "common/text.hpp"

namespace part::retrieval {

nlohmann::json to_json(const Note& note)
{
    return {{"note_id", note.note_id}, {"title", note.title}, {"body", note.body}, {"tags", note.tags}};
}

Note note_from_json(const nlohmann::json& j, const std::string& where)
{
    auto bad = [&](const std::string& why) { return Error(ErrorCode::corpus_format, where + ": " + why); };
    if (!j.is_object()) throw bad("record is not an object");
    Note n;
    if (!j.contains("note_id") || !j["note_id"].is_string()) throw bad("missing string field note_id");
    n.note_id = j["note_id"].get<std::string>();
    if (n.note_id.empty()) throw bad("empty note_id");
    if (j.contains("title")) {
        if (!j["title"].is_string()) throw bad("title must be a string");
        n.title = j["title"].get<std::string>();
    }
    if (!j.contains("body") || !j["body"].is_string()) throw bad("missing string field body");
    n.body = j["body"].get<std::string>();
    if (text::trim(n.body).empty()) throw bad("empty body");
    if (j.contains("tags")) {
        if (!j["tags"].is_array()) throw bad("tags must be an array of strings");
        for (const auto& t : j["tags"]) {
            if (!t.is_string()) throw bad("tags must be an array of strings");
            n.tags.push_back(t.get<std::string>());
        }
    }
    return n;
}

std::vector<Note> parse_corpus(std::string_view contents)
{
    std::vector<Note> notes;
    std::map<std::string, std::size_t> first_seen;
    std::size_t line_no = 0;
    for (const auto& line : text::split(contents, '\n')) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error(ErrorCode::corpus_format, where + ": invalid JSON");
        Note n = note_from_json(j, where);
        const auto [it, fresh] = first_seen.emplace(n.note_id, line_no);
        if (!fresh)
            throw Error(ErrorCode::duplicate_note_id, where + ": duplicate note_id '" + n.note_id +
                                                          "' (first seen on line " + std::to_string(it->second) + ")");
        notes.push_back(std::move(n));
    }
    return notes;
}

std::vector<Note> load_corpus(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open corpus " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus(buf.str());
}

}  // namespace part::retrieval

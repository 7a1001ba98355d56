#include "retrieval/index.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/text.hpp"

namespace part::retrieval {

std::vector<std::string> tokenize(std::string_view s)
{
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
    };
    for (char32_t cp : text::decode(s)) {
        cp = text::fold(cp);
        if (text::is_cjk(cp)) {
            flush();
            std::string t;
            text::append_utf8(t, cp);
            tokens.push_back(std::move(t));
        } else if (text::is_word_char(cp)) {
            text::append_utf8(current, cp);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::vector<std::string> note_terms(const Note& note)
{
    auto terms = tokenize(note.title);
    for (auto& t : tokenize(note.body)) terms.push_back(std::move(t));
    for (const auto& tag : note.tags)
        for (auto& t : tokenize(tag)) terms.push_back(std::move(t));
    return terms;
}

CorpusIndex CorpusIndex::build(const std::vector<Note>& notes, Bm25Params params)
{
    CorpusIndex index;
    index.params_ = params;
    for (const auto& note : notes) {
        if (note.note_id.empty()) throw Error(ErrorCode::invalid_argument, "note with empty id");
        if (text::trim(note.body).empty())
            throw Error(ErrorCode::invalid_argument, "note " + note.note_id + " has an empty body");
        if (!index.documents_.emplace(note.note_id, note).second)
            throw Error(ErrorCode::duplicate_note_id, "duplicate note id: " + note.note_id);
    }

    std::size_t total_len = 0;
    for (const auto& [id, note] : index.documents_) {
        const auto terms = note_terms(note);
        std::map<std::string, std::size_t> tf;
        for (const auto& t : terms) ++tf[t];
        // documents_ iterates in id order, so postings stay sorted by id.
        for (const auto& [term, freq] : tf) index.postings_[term].push_back({id, freq});
        index.doc_lengths_[id] = terms.size();
        total_len += terms.size();
    }
    if (!index.documents_.empty())
        index.avg_doc_length_ = static_cast<double>(total_len) / static_cast<double>(index.documents_.size());
    return index;
}

double bm25_idf(std::size_t doc_count, std::size_t doc_freq)
{
    const double n = static_cast<double>(doc_count);
    const double df = static_cast<double>(doc_freq);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double bm25_term_score(double idf, std::size_t tf, std::size_t doc_len, double avg_doc_len, const Bm25Params& p)
{
    const double f = static_cast<double>(tf);
    const double norm = avg_doc_len > 0.0 ? static_cast<double>(doc_len) / avg_doc_len : 0.0;
    return idf * (f * (p.k1 + 1.0)) / (f + p.k1 * (1.0 - p.b + p.b * norm));
}

}  // namespace part::retrieval

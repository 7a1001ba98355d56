#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace part::retrieval {

struct Note {
    std::string note_id;
    std::string title;
    std::string body;
    std::vector<std::string> tags;

    friend bool operator==(const Note&, const Note&) = default;
};

// Case-fold, split on anything that is not a letter or digit, and emit every
// CJK code point as its own token.
std::vector<std::string> tokenize(std::string_view text);

// Title, body and tags are indexed together.
std::vector<std::string> note_terms(const Note& note);

struct Posting {
    std::string note_id;
    std::size_t term_frequency = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

// Immutable inverted index. Postings lists are sorted by note_id.
class CorpusIndex {
public:
    CorpusIndex() = default;

    // Throws duplicate_note_id or invalid_argument (blank id or body).
    static CorpusIndex build(const std::vector<Note>& notes, Bm25Params params = {});

    const std::map<std::string, Note>& documents() const noexcept { return documents_; }
    const std::map<std::string, std::vector<Posting>>& postings() const noexcept { return postings_; }
    const std::map<std::string, std::size_t>& doc_lengths() const noexcept { return doc_lengths_; }
    double avg_doc_length() const noexcept { return avg_doc_length_; }
    const Bm25Params& params() const noexcept { return params_; }
    std::size_t size() const noexcept { return documents_.size(); }
    bool empty() const noexcept { return documents_.empty(); }

private:
    std::map<std::string, Note> documents_;
    std::map<std::string, std::vector<Posting>> postings_;
    std::map<std::string, std::size_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    Bm25Params params_;
};

// idf(t) = ln(1 + (N - n_t + 0.5) / (n_t + 0.5))
double bm25_idf(std::size_t doc_count, std::size_t doc_freq);

// One term's contribution: idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
double bm25_term_score(double idf, std::size_t tf, std::size_t doc_len, double avg_doc_len, const Bm25Params& p);

}  // namespace part::retrieval

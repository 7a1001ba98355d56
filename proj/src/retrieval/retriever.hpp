#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "domain/types.hpp"
#include "retrieval/index.hpp"

namespace part::retrieval {

inline constexpr std::size_t kDefaultTopK = 5;

struct ScoredNote {
    Note note;
    double score = 0.0;
};

struct RetrievalResult {
    std::vector<ScoredNote> notes;  // scores non-increasing, ties by ascending note_id
    RefinedQuery query;
    std::size_t k_requested = kDefaultTopK;
};

// Port for anything that can answer "top-k notes for this query".
class Retriever {
public:
    virtual ~Retriever() = default;
    virtual std::string label() const = 0;
    // Throws invalid_argument for k == 0.
    virtual RetrievalResult retrieve(const RefinedQuery& query, std::size_t k) const = 0;
};

// BM25 top-k over an index. Only documents sharing at least one term with the
// query are returned. Query terms are de-duplicated before scoring.
RetrievalResult retrieve(const CorpusIndex& index, const RefinedQuery& query, std::size_t k);

// Local BM25 retriever. The index can be swapped while readers hold the old one.
class Bm25Retriever : public Retriever {
public:
    explicit Bm25Retriever(std::shared_ptr<const CorpusIndex> index);

    std::string label() const override { return "bm25"; }
    RetrievalResult retrieve(const RefinedQuery& query, std::size_t k) const override;

    void swap_index(std::shared_ptr<const CorpusIndex> index);
    std::shared_ptr<const CorpusIndex> index() const;

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const CorpusIndex> index_;
};

// Adapter for a remote search service. Wire format:
//   POST <url>  {"query": "<text>", "k": <n>}
//   200         {"notes": [{"note_id", "title", "body", "tags": [...]}, ...]}
// Notes arrive ranked; the score reported is k - rank.
class RemoteRetriever : public Retriever {
public:
    explicit RemoteRetriever(std::string url, int timeout_seconds = 10);

    std::string label() const override { return "remote"; }
    RetrievalResult retrieve(const RefinedQuery& query, std::size_t k) const override;

private:
    std::string scheme_host_port_;
    std::string path_;
    int timeout_seconds_;
};

}  // namespace part::retrieval

#include "retrieval/retriever.hpp"

#include <algorithm>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "common/error.hpp"
#include "retrieval/corpus.hpp"

namespace part::retrieval {

RetrievalResult retrieve(const CorpusIndex& index, const RefinedQuery& query, std::size_t k)
{
    if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
    RetrievalResult result{{}, query, k};

    const auto terms_vec = tokenize(query.text());
    const std::set<std::string> terms(terms_vec.begin(), terms_vec.end());

    std::map<std::string, double> scores;
    for (const auto& term : terms) {
        const auto it = index.postings().find(term);
        if (it == index.postings().end()) continue;
        const double idf = bm25_idf(index.size(), it->second.size());
        for (const auto& posting : it->second) {
            scores[posting.note_id] += bm25_term_score(idf, posting.term_frequency,
                                                       index.doc_lengths().at(posting.note_id),
                                                       index.avg_doc_length(), index.params());
        }
    }

    std::vector<std::pair<std::string, double>> ranked(scores.begin(), scores.end());
    const auto by_rank = [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    };
    const std::size_t take = std::min(k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end(), by_rank);
    ranked.resize(take);

    result.notes.reserve(take);
    for (const auto& [id, score] : ranked) result.notes.push_back({index.documents().at(id), score});
    return result;
}

Bm25Retriever::Bm25Retriever(std::shared_ptr<const CorpusIndex> index) : index_(std::move(index))
{
    if (!index_) index_ = std::make_shared<const CorpusIndex>();
}

RetrievalResult Bm25Retriever::retrieve(const RefinedQuery& query, std::size_t k) const
{
    return retrieval::retrieve(*this->index(), query, k);
}

void Bm25Retriever::swap_index(std::shared_ptr<const CorpusIndex> index)
{
    if (!index) index = std::make_shared<const CorpusIndex>();
    std::lock_guard lock(mutex_);
    index_.swap(index);
}

std::shared_ptr<const CorpusIndex> Bm25Retriever::index() const
{
    std::lock_guard lock(mutex_);
    return index_;
}

RemoteRetriever::RemoteRetriever(std::string url, int timeout_seconds) : timeout_seconds_(timeout_seconds)
{
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::invalid_argument, "retriever url needs a scheme");
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

RetrievalResult RemoteRetriever::retrieve(const RefinedQuery& query, std::size_t k) const
{
    if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    const nlohmann::json req = {{"query", query.text()}, {"k", k}};
    auto res = client.Post(path_, req.dump(), "application/json");
    if (!res) throw Error(ErrorCode::backend_unreachable, "remote retriever unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) throw BackendRejected(res->status, "remote retriever");

    const auto doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("notes") || !doc["notes"].is_array())
        throw BackendRejected(res->status, "remote retriever returned a malformed body");

    RetrievalResult result{{}, query, k};
    std::set<std::string> seen;
    for (const auto& item : doc["notes"]) {
        if (result.notes.size() == k) break;
        Note n = note_from_json(item, "remote note " + std::to_string(result.notes.size()));
        if (!seen.insert(n.note_id).second) continue;
        const double score = static_cast<double>(k - result.notes.size());
        result.notes.push_back({std::move(n), score});
    }
    return result;
}

}  // namespace part::retrieval

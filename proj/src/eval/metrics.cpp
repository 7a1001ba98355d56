#include "eval/metrics.hpp"

#include <map>
#include <numeric>

#include "common/error.hpp"

namespace part::eval {

double precision_at_k(const std::vector<int>& labels, std::size_t k)
{
    if (k == 0) throw Error(ErrorCode::invalid_argument, "precision_at_k needs k >= 1");
    const std::size_t n = std::min(k, labels.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCode::invalid_argument, "labels must be 0 or 1");
        hits += static_cast<std::size_t>(labels[i]);
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b)
{
    if (a.size() != b.size()) throw Error(ErrorCode::length_mismatch, "rater label lists differ in length");
    if (a.empty()) throw Error(ErrorCode::invalid_argument, "cohen_kappa needs at least one item");

    const double n = static_cast<double>(a.size());
    std::map<int, double> count_a, count_b;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        count_a[a[i]] += 1.0;
        count_b[b[i]] += 1.0;
        if (a[i] == b[i]) ++agree;
    }
    const double p_o = static_cast<double>(agree) / n;
    double p_e = 0.0;
    for (const auto& [label, ca] : count_a) {
        auto it = count_b.find(label);
        if (it != count_b.end()) p_e += (ca / n) * (it->second / n);
    }
    if (p_e == 1.0) return 1.0;
    return (p_o - p_e) / (1.0 - p_e);
}

double mean(const std::vector<double>& xs)
{
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace part::eval

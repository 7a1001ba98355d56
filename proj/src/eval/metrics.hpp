#pragma once

#include <cstddef>
#include <vector>

namespace part::eval {

// Hits among the first k labels divided by k. Slots past the end of a short
// list count as misses. Throws invalid_argument for k == 0.
double precision_at_k(const std::vector<int>& labels, std::size_t k);

// Cohen's kappa over two raters' labels for the same items. Returns 1.0 when
// both raters used one identical category throughout. Throws
// length_mismatch for unequal lengths and invalid_argument for empty input.
double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b);

double mean(const std::vector<double>& xs);

}  // namespace part::eval

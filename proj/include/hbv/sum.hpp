#pragma once

#include <cstddef>
#include <vector>

namespace hbv {

// Deterministic pairwise (tree) reduction. Every cell-indexed sum in the
// library goes through one of these so that repeated runs are bit-identical
// and cancellation stays mild. The split point depends only on the index
// range, never on the data.

namespace detail {
constexpr std::size_t kPairwiseLeaf = 16;
}

template <class F>
double pairwise_sum_index(std::size_t lo, std::size_t hi, F&& term) {
    const std::size_t n = hi - lo;
    if (n <= detail::kPairwiseLeaf) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        return s;
    }
    const std::size_t mid = lo + n / 2;
    return pairwise_sum_index(lo, mid, term) + pairwise_sum_index(mid, hi, term);
}

template <class F>
double pairwise_sum_index(std::size_t n, F&& term) {
    return pairwise_sum_index(std::size_t{0}, n, term);
}

inline double pairwise_sum(const double* a, std::size_t n) {
    return pairwise_sum_index(n, [a](std::size_t i) { return a[i]; });
}

inline double pairwise_sum(const std::vector<double>& a) {
    return pairwise_sum(a.data(), a.size());
}

}  // namespace hbv

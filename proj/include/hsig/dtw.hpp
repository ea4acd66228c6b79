#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace hsig {

// Monotone full-path alignment between a base sequence and a signature.
// Indices are 0-based: the path runs from (0, 0) to (n_base-1, n_sig-1).
struct AlignmentMap {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (k_base, k_sig)
    double cost = 0;
};

// Classic DTW with step set {(1,0), (0,1), (1,1)}. `cost(kb, ks)` is the
// local cost; the path cost is the sum of local costs of all visited pairs.
// Ties during backtracking prefer the diagonal, then advancing the base,
// then advancing the signature, so the result is deterministic.
template <class LocalCost>
AlignmentMap dtw(std::size_t n_base, std::size_t n_sig, LocalCost&& cost) {
    AlignmentMap out;
    if (n_base == 0 || n_sig == 0) return out;

    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t cols = n_sig;
    std::vector<double> acc(n_base * n_sig, inf);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * cols + j]; };

    for (std::size_t i = 0; i < n_base; ++i) {
        for (std::size_t j = 0; j < n_sig; ++j) {
            double best;
            if (i == 0 && j == 0) {
                best = 0;
            } else {
                best = inf;
                if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
                if (i > 0) best = std::min(best, at(i - 1, j));
                if (j > 0) best = std::min(best, at(i, j - 1));
            }
            at(i, j) = best + cost(i, j);
        }
    }

    std::size_t i = n_base - 1;
    std::size_t j = n_sig - 1;
    out.cost = at(i, j);
    out.pairs.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            const double diag = at(i - 1, j - 1);
            const double up = at(i - 1, j);
            const double left = at(i, j - 1);
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        }
        out.pairs.emplace_back(i, j);
    }
    std::reverse(out.pairs.begin(), out.pairs.end());
    return out;
}

// Structural check of an alignment path against the sequence lengths.
inline bool is_valid_path(const AlignmentMap& map, std::size_t n_base, std::size_t n_sig) {
    const auto& p = map.pairs;
    if (p.empty() || p.front() != std::pair<std::size_t, std::size_t>{0, 0} ||
        p.back() != std::pair<std::size_t, std::size_t>{n_base - 1, n_sig - 1}) {
        return false;
    }
    for (std::size_t k = 1; k < p.size(); ++k) {
        const auto di = p[k].first - p[k - 1].first;
        const auto dj = p[k].second - p[k - 1].second;
        if (p[k].first < p[k - 1].first || p[k].second < p[k - 1].second) return false;
        if (di > 1 || dj > 1 || di + dj == 0) return false;
    }
    return true;
}

} // namespace hsig

#pragma once

#include "pcc/distance.hpp"
#include "pcc/engine.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace pcc::test {

inline DistanceMatrix m4() {
    return DistanceMatrix::build({{0, 1, 3, 7}, {1, 0, 2, 6}, {3, 2, 0, 4}, {7, 6, 4, 0}});
}

inline DistanceMatrix random_matrix(std::size_t n, std::mt19937_64& rng, int lo = 1, int hi = 100,
                                    bool symmetric = true) {
    std::uniform_int_distribution<int>  u(lo, hi);
    std::vector<std::vector<double>>    rows(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = symmetric ? i + 1 : 0; j < n; ++j) {
            if (i == j) continue;
            rows[i][j] = u(rng);
            if (symmetric) rows[j][i] = rows[i][j];
        }
    }
    return DistanceMatrix::build(rows);
}

inline IndexSet iota_set(std::size_t n) {
    IndexSet s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = i;
    return s;
}

// Naive separation, written out independently of the library.
inline double naive_separate(bool minmax, const DistanceMatrix& m, Index i, const IndexSet& c) {
    double v = 0.0;
    for (Index j : c) {
        if (j == i) continue;
        v = minmax ? std::max(v, m(i, j)) : v + m(i, j);
    }
    return v;
}

// Returns (span, all minimizers).
inline std::pair<double, IndexSet> naive_centroids(bool minmax, const DistanceMatrix& m, const IndexSet& c) {
    double   best = 0.0;
    IndexSet all;
    for (Index i : c) {
        const double v = naive_separate(minmax, m, i, c);
        if (all.empty() || v < best) {
            best = v;
            all  = {i};
        } else if (v == best) {
            all.push_back(i);
        }
    }
    std::sort(all.begin(), all.end());
    return {best, all};
}

// Random partition of {0..n-1} into k nonempty blocks.
inline std::vector<IndexSet> random_partition(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    IndexSet perm = iota_set(n);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<IndexSet> blocks(k);
    for (std::size_t h = 0; h < k; ++h) blocks[h].push_back(perm[h]);
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    for (std::size_t i = k; i < n; ++i) blocks[pick(rng)].push_back(perm[i]);
    for (auto& b : blocks) std::sort(b.begin(), b.end());
    return blocks;
}

inline std::vector<IndexSet> member_lists(const Clustering& c) {
    std::vector<IndexSet> out;
    for (const auto& cl : c.clusters) out.push_back(cl.members);
    return out;
}

}  // namespace pcc::test

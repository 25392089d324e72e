#pragma once

#include "pcc/distance.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <span>
#include <string>

namespace pcc {

/// All minimizers of sum_j d(i,j)^power over the cluster, computed with exact integers.
/// Requires non-negative integral distances.
inline IndexSet exact_weighted_minsum_centroids(const DistanceMatrix& m, std::span<const Index> cluster,
                                                unsigned power) {
    using boost::multiprecision::cpp_int;
    if (cluster.empty()) {
        throw Error(ErrorCode::EmptyCluster, "exact weighting of an empty set");
    }
    IndexSet best;
    cpp_int  best_sum;
    for (const Index i : cluster) {
        cpp_int sum = 0;
        for (const Index j : cluster) {
            const double v = m(i, j);
            if (v < 0.0 || std::trunc(v) != v) {
                throw Error(ErrorCode::NegativeEntryWithWeighting, "exact weighting needs non-negative integers");
            }
            sum += boost::multiprecision::pow(cpp_int(static_cast<long long>(v)), power);
        }
        if (best.empty() || sum < best_sum) {
            best_sum = sum;
            best.assign(1, i);
        } else if (sum == best_sum) {
            best.push_back(i);
        }
    }
    return best;
}

struct StableWeight {
    unsigned p = 0;  // weight exponent; distances are raised to p + 1
    IndexSet centroids;
};

/// Doubles p from 1 until the exact MinSum centroid set repeats and p + 1 is past the point
/// where the largest distance dominates every sum of smaller ones.
inline StableWeight stable_weighted_centroids(const DistanceMatrix& m, std::span<const Index> cluster,
                                              unsigned max_p = 1u << 14) {
    double largest = 0.0;
    for (const Index i : cluster) {
        for (const Index j : cluster) {
            largest = std::max(largest, m(i, j));
        }
    }
    const double n     = static_cast<double>(cluster.size());
    const double bound = largest <= 1.0 || n <= 2.0 ? 1.0 : std::log(n - 1.0) / std::log(largest / (largest - 1.0));

    StableWeight prev{1, exact_weighted_minsum_centroids(m, cluster, 2)};
    for (unsigned p = 2; p <= max_p; p *= 2) {
        StableWeight cur{p, exact_weighted_minsum_centroids(m, cluster, p + 1)};
        if (cur.centroids == prev.centroids && static_cast<double>(prev.p + 1) > bound) {
            return prev;
        }
        prev = std::move(cur);
    }
    return prev;
}

}  // namespace pcc

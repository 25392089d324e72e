#pragma once

#include "pcc/distance.hpp"
#include "pcc/intensity.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pcc::oracle {

/// Symmetric matrix with zero diagonal and off-diagonal integers drawn uniformly from [lo, hi].
DistanceMatrix random_symmetric_integer(std::size_t n, int lo, int hi, std::mt19937_64& rng);

struct ReferenceStep {
    std::size_t k_o      = 0;
    IndexSet    members;  // ascending
    Index       centroid = 0;
    double      value    = 0.0;  // largest distance (MinMax) or distance sum (MinSum) from the centroid
};

/// Straightforward adaptive start: explicit sorted neighbor lists per anchor, admissible neighbor
/// counts against the Phase-1 limits, and the (larger size, smaller value, lower index) choice.
std::vector<ReferenceStep> reference_adaptive(const DistanceMatrix& m, std::size_t k, MeasureKind kind,
                                              const AdaptiveOptions& options);

struct SuiteOptions {
    std::size_t   trials = 500;
    std::size_t   n_min  = 6;
    std::size_t   n_max  = 12;
    std::size_t   k_min  = 2;
    std::size_t   k_max  = 4;
    int           entry_min = 1;
    int           entry_max = 100;
    std::uint64_t seed   = 1;
};

struct SuiteResult {
    std::string              name;
    std::size_t              trials = 0;
    std::size_t              passed = 0;
    std::vector<std::string> failures;  // first few mismatch descriptions

    [[nodiscard]] bool ok() const noexcept { return passed == trials; }
};

/// Every cluster of primary_minmax / primary_minsum has the span of the exhaustive best cluster
/// of the same size drawn from the points still available. Throws CombinatorialBlowup when
/// n_max would exceed the enumeration guard.
SuiteResult primary_suite(const SuiteOptions& options);

/// adaptive_minmax / adaptive_minsum agree with reference_adaptive on size, centroid and value at
/// every step. Lambda cycles through `lambdas`.
SuiteResult adaptive_suite(const SuiteOptions& options, const std::vector<double>& lambdas = {0.0, 0.3, 1.0});

/// Largest n for which every subset size passes the brute-force guard.
std::size_t max_oracle_n();

}  // namespace pcc::oracle

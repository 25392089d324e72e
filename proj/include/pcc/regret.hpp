#pragma once

#include "pcc/engine.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace pcc {

struct RegretEntry {
    Index  point       = 0;
    Index  assign      = 0;  // i' = Assign(j)
    Index  reassign    = 0;  // i'' = ReAssign(j)
    double a_dist      = 0.0;
    double r_dist      = 0.0;
    double regret      = 0.0;
    std::size_t target = 0;  // cluster position of i''
};

/// Points that Step 2 would move to another cluster, with their regrets. Centroids stay put.
/// Ordered by descending regret, ascending point index on ties.
std::vector<RegretEntry> regret_candidates(const Clustering& step1, const EngineConfig& cfg, const DistanceMatrix& m);

inline constexpr std::size_t unlimited = std::numeric_limits<std::size_t>::max();

/// Step 2 restricted to the r = max(1, ceil(F * |CandidateList|)) largest regrets: every candidate
/// with regret >= T (the r-th largest) moves, at most `max_select` of them. F = 1 reproduces Step 2.
std::pair<Clustering, std::size_t> regret_step(const Clustering& step1, const EngineConfig& cfg,
                                               const DistanceMatrix& m, double fraction,
                                               std::size_t max_select = unlimited);

/// F per iteration: linear from `start` at iteration 0 to `end` at iteration `ramp`, then flat.
struct FSchedule {
    double      start = 1.0;
    double      end   = 1.0;
    std::size_t ramp  = 1;

    static FSchedule constant(double f) { return {f, f, 1}; }
    [[nodiscard]] double at(std::size_t iteration) const;
    void validate() const;
};

RunReport run_regret_threshold(std::span<const Index> initial_centroids, const EngineConfig& cfg,
                               const DistanceMatrix& m, const FSchedule& schedule,
                               std::size_t max_select = unlimited);
RunReport run_regret_threshold(const Clustering& start, StartEntry entry, const EngineConfig& cfg,
                               const DistanceMatrix& m, const FSchedule& schedule,
                               std::size_t max_select = unlimited);

enum class CentroidConvention { exclude, include };
enum class Accent { mean, squared_mean };
enum class Denominator { cluster_size, non_centroid_size };

struct QualityOptions {
    CentroidConvention convention    = CentroidConvention::exclude;
    Accent             accent        = Accent::mean;
    Denominator        denominator   = Denominator::cluster_size;
    bool               use_all_centroids = false;  // C*(h) instead of the single centroid
};

struct QualityReport {
    std::vector<double> d1, d2, d_o;      // per point
    std::vector<double> cluster_d_o;      // D_o(h)
    std::vector<double> cluster_mean;     // Mean_o(h)
    double              value = 0.0;
};

/// d_1(j) and d_2(j) are measured from the centroid, d(i, j), as in Step 2.
QualityReport quality(const Clustering& c, const DistanceMatrix& m, const QualityOptions& options = {});

enum class RestartMode { second, third, farthest };

/// New clusters for a restart: every non-centroid point (or the `partial_fraction` of them with
/// the smallest d_o) moves to the cluster picked by `mode`. The result is meant for a Step-1 entry.
Clustering diversified_restart(const Clustering& c, const EngineConfig& cfg, const DistanceMatrix& m,
                               RestartMode mode = RestartMode::second, double partial_fraction = 1.0);

/// Points with d_o(j) <= cutoff move to PC_2(j) with probability 1 / (1 + d_o(j) / scale), scale
/// being the mean positive d_o.
Clustering stochastic_restart(const Clustering& c, const EngineConfig& cfg, const DistanceMatrix& m, double cutoff,
                              std::uint64_t rng_seed);

}  // namespace pcc

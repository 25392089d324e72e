#pragma once

#include "pcc/distance.hpp"
#include "pcc/engine.hpp"

#include <optional>
#include <vector>

namespace pcc {

/// One cluster C(k_o) emitted by an intensity-based start, with the bookkeeping of its step.
struct IntensityCluster {
    std::size_t k_o = 0;
    std::size_t n_o = 0;  // |N_o| before this cluster was removed
    IndexSet    members;  // ascending
    Index       centroid = 0;
    double      span     = 0.0;  // separate(centroid, members)

    // Size bounds and limits used at this step. Primary methods have min_size = max_size.
    std::size_t min_size = 0;
    std::size_t max_size = 0;
    double      target_gap     = 0.0;
    double      distance_limit = 0.0;
    double      first_sum_limit = 0.0;
};

struct IntensityState {
    std::vector<IntensityCluster> clusters;   // in generation order, k_o = k, k-1, ...
    IndexSet                      remaining;  // N_o after the last step (empty unless interrupted)
    std::vector<bool>             available;  // delta(i)
    bool                          absorbed = false;  // fewer than k clusters (allow_absorb)

    [[nodiscard]] IndexSet centroids() const;
    [[nodiscard]] std::vector<std::size_t> cluster_sizes() const;
};

struct PrimaryOptions {
    // ClusterSize(k_o) for k_o = k..1 (front is k). Empty means ceil(n_o / k_o) throughout.
    std::vector<std::size_t> cluster_sizes;
    bool                     early_exit = true;
    // Stop after emitting C(interrupt_at); the rest of N_o is left in `remaining`.
    std::optional<std::size_t> interrupt_at;
};

IntensityState primary_minmax(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                              const PrimaryOptions& options = {});
IntensityState primary_minsum(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                              const PrimaryOptions& options = {});

enum class MaxSizeRule {
    per_pseudocode,  // n_o - MinSize * (k_o - 1), raised to MinSize when smaller
    per_text,        // n_o - GlobalMinSize * (k_o - 1)
};

struct AdaptiveOptions {
    double      lambda          = 0.3;
    std::size_t global_min_size = 2;
    MaxSizeRule max_size_rule   = MaxSizeRule::per_pseudocode;
    bool        allow_absorb    = false;  // MaxSize = n_o; may end with fewer than k clusters
};

IntensityState adaptive_minmax(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                               const AdaptiveOptions& options = {});
IntensityState adaptive_minsum(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                               const AdaptiveOptions& options = {});

/// MinSize and MaxSize for one step of an adaptive method. Throws InfeasibleBounds.
std::pair<std::size_t, std::size_t> adaptive_size_bounds(std::size_t n_o, std::size_t k_o,
                                                         const AdaptiveOptions& options);

enum class RefinementApproach { approach1, approach2 };

struct RefinementResult {
    IntensityState           first;
    std::vector<std::size_t> sizes;  // ClusterSize(k_o), k_o = k..1
    IntensityState           second;
};

/// Runs the primary method, reassigns once (approach1) or runs the engine to termination
/// (approach2), sorts the resulting cluster sizes in descending order and reruns the primary
/// method with those sizes. With `interrupt_at`, the first pass stops after C(k_o*) and sizes
/// for k_o < k_o* fall back to ceil(n_o / k_o).
RefinementResult cluster_size_refinement(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                                         RefinementApproach approach, MeasureKind base,
                                         std::optional<std::size_t> interrupt_at = std::nullopt,
                                         const EngineConfig& engine = {});

struct BestCluster {
    IndexSet members;
    Index    centroid = 0;
    double   span     = 0.0;
};

inline constexpr double max_brute_force_subsets = 1e6;

/// Exhaustive minimum span over all v-subsets of `pool`; ties go to the lexicographically
/// smallest member set. Throws CombinatorialBlowup past max_brute_force_subsets subsets.
BestCluster brute_force_best_cluster(const DistanceMatrix& m, const IndexSet& pool, std::size_t v,
                                     const SeparationMeasure& measure);

/// Clusters ready for a Step-2 entry into the engine. Leftover points in `remaining` (interrupted
/// runs) join the cluster of their nearest centroid.
Clustering to_clustering(const IntensityState& state, const SeparationMeasure& measure, const DistanceMatrix& m);

}  // namespace pcc

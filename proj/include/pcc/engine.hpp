#pragma once

#include "pcc/distance.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace pcc {

inline constexpr Index npos = std::numeric_limits<Index>::max();

struct Cluster {
    IndexSet members;        // ascending
    Index    centroid = 0;
    IndexSet all_centroids;  // ascending, subset of members
    double   span = 0.0;     // separate(centroid, members)
};

struct Clustering {
    std::vector<Cluster>     clusters;
    std::vector<std::size_t> assignment;  // point -> position in `clusters`

    [[nodiscard]] std::size_t size() const noexcept { return clusters.size(); }

    /// Union of the per-cluster centroid sets used by Step 2: every C*(h) when `multi`,
    /// otherwise the single centroid of each cluster. Ascending.
    [[nodiscard]] IndexSet centroid_set(bool multi) const;

    /// Throws std::logic_error unless the clusters partition {0..n-1}, are nonempty, agree
    /// with `assignment` and hold their centroids.
    void validate(std::size_t n) const;
};

/// Builds `assignment` from the member lists.
Clustering make_clustering(std::vector<Cluster> clusters, std::size_t n);

enum class Objective { span_sum, span_sum_squared, span_mean_sum };
enum class Termination { fixed_point, objective_local_min };
enum class StopReason { fixed_point, local_min, iteration_cap };

struct EngineConfig {
    SeparationMeasure measure;
    bool              multi_centroid         = false;
    bool              reassign_all           = false;
    Objective         objective              = Objective::span_sum;
    Termination       termination            = Termination::fixed_point;
    std::size_t       max_iterations         = 100;
    bool              use_accelerated_update = false;
    bool              record_trajectory      = false;
};

struct RunReport {
    std::size_t              iterations = 0;
    std::vector<double>      objective_trace;    // iterations + 1 entries
    std::vector<std::size_t> reassigned_counts;  // iterations entries
    std::vector<std::size_t> selected_counts;    // regret-threshold runs only
    Clustering               final;
    StopReason               terminated_by = StopReason::iteration_cap;
    std::size_t              initial_cluster_count = 0;
    // Objective of the iterate that triggered objective_local_min termination.
    std::optional<double> rejected_objective;
    std::optional<double> value_metric;
    // Partition after every accepted iteration (index 0 is the start) when requested.
    std::vector<Clustering> trajectory;
};

/// Step 0 / Step 2 assignment. Each centroid seeds (or keeps) its own cluster and every other
/// point joins the nearest centroid by d(centroid, point), lowest centroid index on ties.
Clustering assign_points(std::span<const Index> centroids, const DistanceMatrix& m, bool reassign_all);

/// Generalized Step 2: `centroid_sets[h]` are the centroids retained by cluster h. Points outside
/// the union join the cluster of their nearest centroid. With `reassign_all`, a centroid whose
/// distance from a foreign centroid is strictly below its distance from every centroid of its
/// own set (at most d(i,i) = 0) is absorbed; clusters left without centroids disappear.
Clustering assign_to_centroid_sets(const std::vector<IndexSet>& centroid_sets, const DistanceMatrix& m,
                                   bool reassign_all);

/// Step 1: refreshes every cluster's pseudo-centroid, full centroid set and span.
Clustering recompute_centroids(const Clustering& c, const EngineConfig& cfg, const DistanceMatrix& m);

/// One Step 1 + Step 2 pass. `changed` is false iff the Step-1 centroid set equals the set
/// carried by `c`.
std::pair<Clustering, bool> kpc_iterate(const Clustering& c, const EngineConfig& cfg, const DistanceMatrix& m);

enum class StartEntry {
    step1,  // an arbitrary partition; Step 1 runs first
    step2,  // clusters with their centroids already identified (intensity-based starts)
};

RunReport run_kpc(std::span<const Index> initial_centroids, const EngineConfig& cfg, const DistanceMatrix& m);
RunReport run_kpc(const Clustering& start, StartEntry entry, const EngineConfig& cfg, const DistanceMatrix& m);

double span_objective(const Clustering& c, Objective mode);

// ---------------------------------------------------------------------------------------------
// Accelerated Step-1 updates.

/// MaxDist(i, C) for every member of C, with the member that attains it (npos for a singleton).
struct MaxDistState {
    IndexSet            members;  // ascending
    std::vector<double> max_dist;
    IndexSet            match;
};

MaxDistState make_max_dist_state(std::span<const Index> members, const DistanceMatrix& m);
CentroidResult centroid_from_state(const MaxDistState& state);

/// Moves `state` to `new_members`, touching only the rows that can change: fresh rows for the
/// points in `added`, an incremental max against `added` for retained points whose match is
/// still present, and a rescan for retained points whose match was dropped. Throws
/// MatchPointDropped (state untouched) when the current centroid's match is no longer a member;
/// the caller then rebuilds the state from scratch.
CentroidResult accelerated_minmax_update(MaxDistState& state, std::span<const Index> new_members,
                                         std::span<const Index> added, const DistanceMatrix& m);

struct SumDistState {
    IndexSet            members;  // ascending
    std::vector<double> sums;
};

struct SetDelta {
    IndexSet kept;     // C0 = C' n C''
    IndexSet added;    // C+ = C'' \ C'
    IndexSet removed;  // C- = C' \ C''
};

SetDelta set_delta(std::span<const Index> before, std::span<const Index> after);
SumDistState make_sum_dist_state(std::span<const Index> members, const DistanceMatrix& m);
CentroidResult centroid_from_state(const SumDistState& state);

/// SumDist(i, C'') = SumDist(i, C') + sum over C+ - sum over C- for retained points; fresh sums
/// for added points. Throws InconsistentSets when `delta` does not describe a change of `prev`.
SumDistState accelerated_minsum_update(const SumDistState& prev, const SetDelta& delta, const DistanceMatrix& m);

namespace detail {

// Step-2 policy hook shared by run_kpc and the regret-threshold variant. Receives the Step-1
// clustering and the iteration number (0-based); returns the reassigned clustering and the
// number of points the policy chose to move.
struct Step2Policy {
    virtual ~Step2Policy()                                                              = default;
    virtual std::pair<Clustering, std::size_t> apply(const Clustering& step1, std::size_t iteration) = 0;
};

RunReport drive(Clustering start, const EngineConfig& cfg, const DistanceMatrix& m, Step2Policy& policy);

Clustering step2(const Clustering& step1, const EngineConfig& cfg, const DistanceMatrix& m);

}  // namespace detail

}  // namespace pcc

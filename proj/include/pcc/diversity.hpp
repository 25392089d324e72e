#pragma once

#include "pcc/distance.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pcc {

/// Outcome of a diversity-based start: the ordered seeds H_o = (i(1), ..., i(k_o)) and the
/// candidates I_o = N \ H_o that were never chosen.
struct DiversityState {
    IndexSet            chosen;     // H_o in selection order
    IndexSet            remaining;  // I_o, ascending
    std::vector<double> mind_trace; // MinD(i(k_o)) for k_o = 2..|H_o|

    // Refined/compound methods: final MinD(i(k)) of every executed pass, in order.
    std::vector<double> maxmin_history;
    std::size_t         passes = 1;

    // Successive elimination ran out of points before reaching k.
    bool k_too_large = false;
};

/// Greedy max-min dispersion: each new seed maximizes its minimum distance to the seeds so far.
DiversityState simple_diversity(const DistanceMatrix& m, std::size_t k, Index seed_point = 0);

enum class RestartPick { last, middle };

/// Re-seeds from i(k) (or the middle element) while the final MinD(i(k)) strictly improves and
/// returns the best pass. At most `max_passes` executions of the core loop.
DiversityState refined_diversity(const DistanceMatrix& m, std::size_t k, Index seed_point = 0,
                                 RestartPick pick = RestartPick::last, std::size_t max_passes = 10);

/// Refined loop first run to local optimality at k_check, then extended to k with a second
/// local-optimality loop.
DiversityState compound_diversity(const DistanceMatrix& m, std::size_t k, std::size_t k_check, Index seed_point = 0,
                                  std::size_t max_passes = 10);

enum class TargetRule { mean, median };

struct TargetSpec {
    double     target = 0.0;  // T
    double     slack  = 0.0;  // T_0, absolute
    double     slack_fraction = 0.0;  // f; when positive, T_0 = f * T overrides `slack`
    TargetRule rule = TargetRule::mean;

    [[nodiscard]] double effective_slack(double t) const noexcept {
        return slack_fraction > 0.0 ? slack_fraction * t : slack;
    }
};

/// Mean or median of a MinD trace, the usual way to derive a target T from an earlier run.
double derive_target(const std::vector<double>& mind_trace, TargetRule rule);

/// Each new seed minimizes |MinD(i) - T|.
DiversityState targeted_simple(const DistanceMatrix& m, std::size_t k, const TargetSpec& target_spec, Index seed_point = 0);

enum class CompactRule { max_d, sum_d };

/// MinD_o(i) = min distance from i to the other members of `chosen`.
std::vector<double> min_d_within(const DistanceMatrix& m, const IndexSet& chosen);

/// Mean of MinD_o over `chosen` and the member whose MinD_o is closest to it.
std::pair<double, Index> mean_min_d(const DistanceMatrix& m, const IndexSet& chosen);

/// Targeted selection seeded from a prior H_o: T = MeanMinD(prior), i(1) = i#, candidates
/// restricted to Deviation(i) <= MinDev + T_0 and chosen by smallest MaxD (or SumD) to H_o.
/// With max_passes > 1 the method is re-seeded from its own output while T increases.
DiversityState targeted_tiebreak(const DistanceMatrix& m, std::size_t k, const TargetSpec& target_spec,
                                 const DiversityState& prior, CompactRule rule = CompactRule::max_d,
                                 std::size_t max_passes = 1);

/// Max-min selection where every candidate with MinD(i) >= MaxMin - T_0 qualifies and the
/// most compact one (smallest MaxD or SumD to H_o) wins.
DiversityState compact_maxmin(const DistanceMatrix& m, std::size_t k, double slack, Index seed_point = 0,
                              CompactRule rule = CompactRule::max_d);

enum class EliminationRule { random, span_max, span_min, span_mean };
enum class ThresholdRule { mean, max };

struct EliminationOptions {
    EliminationRule   rule    = EliminationRule::span_max;
    SeparationMeasure measure = {};
    bool              iterate = false;
    std::size_t       max_passes = 5;
    // Proximity(i) = { j : d(i,j) <= U } once U is known.
    bool              u_mode = false;
    ThresholdRule     u_rule = ThresholdRule::mean;
    std::uint64_t     rng_seed = 0;
};

/// Successive elimination: pick i' by the rule over V(i) = Span(Proximity(i)), then drop i' and
/// its ceil(n_o / k_o) nearest remaining points, with k_o the number of seeds still to choose.
DiversityState successive_elimination(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                                      const EliminationOptions& options = {});

/// k_o values (2-based, matching mind_trace) where MinD drops by more than `min_gap` from its
/// predecessor or falls below `floor`.
std::vector<std::size_t> mind_trace_report(const DiversityState& state, double min_gap,
                                           std::optional<double> floor = std::nullopt);

}  // namespace pcc

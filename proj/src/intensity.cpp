#include "pcc/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace pcc {

namespace {

constexpr double large = std::numeric_limits<double>::infinity();

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void check_k(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k) {
    if (k < 1 || k > m.size()) {
        throw Error(ErrorCode::BadK, "k = " + std::to_string(k) + " outside [1, " + std::to_string(m.size()) + "]");
    }
    if (order.size() != m.size()) {
        throw Error(ErrorCode::ConfigError, "neighbor order does not match the matrix");
    }
}

// delta(i), N_o and cluster emission shared by every intensity method.
class Pool {
  public:
    Pool(const DistanceMatrix& m, const NeighborOrder& order) : m_(m), order_(order), available_(m.size(), true) {
        n_o_ = m.size();
    }

    [[nodiscard]] std::size_t n_o() const noexcept { return n_o_; }
    [[nodiscard]] bool available(Index i) const noexcept { return available_[i]; }
    [[nodiscard]] std::span<const std::uint32_t> order(Index i) const { return order_.of(i); }

    IndexSet members() const {
        IndexSet out;
        for (Index i = 0; i < m_.size(); ++i) {
            if (available_[i]) {
                out.push_back(i);
            }
        }
        return out;
    }

    // C = {i*} plus its first `scan` available neighbors; removed from N_o.
    IndexSet take(Index centre, std::size_t scan) {
        IndexSet c{centre};
        for (const auto j : order_.of(centre)) {
            if (c.size() > scan) {
                break;
            }
            if (available_[j]) {
                c.push_back(j);
            }
        }
        for (const Index j : c) {
            available_[j] = false;
        }
        n_o_ -= c.size();
        std::sort(c.begin(), c.end());
        return c;
    }

    IndexSet take_all() {
        auto c = members();
        for (const Index j : c) {
            available_[j] = false;
        }
        n_o_ = 0;
        return c;
    }

    void finish(IntensityState& state) const {
        state.available = available_;
        state.remaining = members();
    }

  private:
    const DistanceMatrix& m_;
    const NeighborOrder&  order_;
    std::vector<bool>     available_;
    std::size_t           n_o_ = 0;
};

IntensityCluster emit(Pool& pool, Index centre, std::size_t scan, std::size_t k_o, const SeparationMeasure& measure,
                      const DistanceMatrix& m) {
    IntensityCluster c;
    c.k_o      = k_o;
    c.n_o      = pool.n_o();
    c.centroid = centre;
    c.members  = k_o == 1 ? pool.take_all() : pool.take(centre, scan);
    c.span     = separate(measure, centre, c.members, m);
    return c;
}

// MinMax / MinSum Distance Algorithm: i* over N_o for a fixed ScanSize.
Index primary_best(const DistanceMatrix& m, const Pool& pool, std::size_t scan_size, MeasureKind kind,
                   bool early_exit) {
    Index  best_i = npos;
    double best   = large;
    for (Index i = 0; i < m.size(); ++i) {
        if (!pool.available(i)) {
            continue;
        }
        double      value = 0.0;
        std::size_t scan  = 0;
        bool        pruned = false;
        if (scan_size > 0) {
            for (const auto j : pool.order(i)) {
                if (!pool.available(j)) {
                    continue;
                }
                ++scan;
                const double d = m(i, j);
                if (kind == MeasureKind::min_max) {
                    if (early_exit && best_i != npos && d >= best) {
                        pruned = true;
                        break;
                    }
                    value = d;
                } else {
                    value += d;
                }
                if (scan == scan_size) {
                    break;
                }
            }
        }
        if (pruned) {
            continue;
        }
        if (best_i == npos || value < best) {
            best_i = i;
            best   = value;
        }
    }
    return best_i;
}

IntensityState run_primary(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                           const PrimaryOptions& options, MeasureKind kind) {
    check_k(m, order, k);
    if (options.interrupt_at && (*options.interrupt_at < 1 || *options.interrupt_at > k)) {
        throw Error(ErrorCode::BadK, "interrupt_at must lie in [1, k]");
    }
    const SeparationMeasure measure{kind, 0.0};
    Pool                    pool(m, order);
    IntensityState          state;
    for (std::size_t step = 0; step < k; ++step) {
        const std::size_t k_o = k - step;
        if (options.interrupt_at && k_o < *options.interrupt_at) {
            break;
        }
        const std::size_t n_o  = pool.n_o();
        std::size_t       size = ceil_div(n_o, k_o);
        if (k_o == 1) {
            size = n_o;
        } else if (step < options.cluster_sizes.size()) {
            size = options.cluster_sizes[step];
            if (size < 1 || size + (k_o - 1) > n_o) {
                throw Error(ErrorCode::InfeasibleBounds, "ClusterSize(" + std::to_string(k_o) + ") = " +
                                                             std::to_string(size) + " with n_o = " +
                                                             std::to_string(n_o));
            }
        }
        const Index centre = primary_best(m, pool, size - 1, kind, options.early_exit);
        auto        c      = emit(pool, centre, size - 1, k_o, measure, m);
        c.min_size = c.max_size = size;
        state.clusters.push_back(std::move(c));
    }
    pool.finish(state);
    return state;
}

// ---------------------------------------------------------------------------------------------

struct Phase1Result {
    double                   best_distance = large;
    double                   best_sum      = large;
    double                   target_gap    = 0.0;
    std::vector<std::size_t> resume;  // s(i): position in order(i) where Scan reached MinScan
    std::vector<double>      sum_at;  // Sum(i)
};

Phase1Result phase1(const DistanceMatrix& m, const Pool& pool, std::size_t min_scan, double lambda, MeasureKind kind) {
    Phase1Result r;
    r.resume.assign(m.size(), 0);
    r.sum_at.assign(m.size(), 0.0);
    double best_min_gap = 0.0;
    double best_sum_gap = 0.0;
    bool   have_best    = false;
    for (Index i = 0; i < m.size(); ++i) {
        if (!pool.available(i)) {
            continue;
        }
        double min_gap = large, sum = 0.0, sum_gap = 0.0, distance = 0.0, previous = 0.0;
        if (min_scan > 0) {
            std::size_t scan = 0;
            const auto  ord  = pool.order(i);
            for (std::size_t s = 0; s < ord.size(); ++s) {
                const auto j = ord[s];
                if (!pool.available(j)) {
                    continue;
                }
                ++scan;
                distance = m(i, j);
                sum += distance;
                if (scan > 1) {
                    const double gap = distance - previous;
                    sum_gap += gap;
                    min_gap = std::min(gap, min_gap);
                }
                if (scan == min_scan) {
                    r.resume[i] = s;
                    break;
                }
                previous = distance;
            }
        }
        r.sum_at[i] = sum;
        bool better = false;
        if (kind == MeasureKind::min_max) {
            better = !have_best || distance < r.best_distance ||
                     (distance == r.best_distance && min_gap > best_min_gap);
        } else {
            better = !have_best || sum < r.best_sum || (sum == r.best_sum && distance < r.best_distance) ||
                     (sum == r.best_sum && distance == r.best_distance && min_gap > best_min_gap);
        }
        if (better) {
            have_best       = true;
            r.best_distance = distance;
            r.best_sum      = sum;
            best_min_gap    = min_gap;
            best_sum_gap    = sum_gap;
        }
    }
    if (min_scan >= 2) {
        const double mean_gap = best_sum_gap / static_cast<double>(min_scan - 1);
        r.target_gap          = lambda * mean_gap + (1.0 - lambda) * best_min_gap;
    }
    return r;
}

struct Phase2Result {
    Index       centre    = npos;
    std::size_t best_scan = 0;
};

Phase2Result phase2_minmax(const DistanceMatrix& m, const Pool& pool, const Phase1Result& p1, std::size_t min_scan,
                           std::size_t max_scan, double distance_limit) {
    long   best_scan     = static_cast<long>(min_scan) - 1;
    double best_distance = large;
    Index  centre        = npos;
    for (Index i = 0; i < m.size(); ++i) {
        if (!pool.available(i)) {
            continue;
        }
        const auto ord = pool.order(i);
        long       scan;
        double     distance = 0.0;
        std::size_t s;
        if (min_scan == 0) {
            scan = 0;
            s    = 0;
        } else {
            scan = static_cast<long>(min_scan) - 1;
            s    = p1.resume[i];
        }
        if (scan < static_cast<long>(max_scan)) {
            for (; s < ord.size(); ++s) {
                const auto j = ord[s];
                if (!pool.available(j)) {
                    continue;
                }
                ++scan;
                if (m(i, j) > distance_limit) {
                    --scan;
                    break;
                }
                distance = m(i, j);
                if (scan >= static_cast<long>(max_scan)) {
                    break;
                }
            }
        }
        if (scan >= static_cast<long>(min_scan)) {
            if (scan > best_scan || (scan == best_scan && distance < best_distance)) {
                centre        = i;
                best_scan     = scan;
                best_distance = distance;
            }
        }
    }
    return {centre, static_cast<std::size_t>(best_scan)};
}

Phase2Result phase2_minsum(const DistanceMatrix& m, const Pool& pool, const Phase1Result& p1, std::size_t min_scan,
                           std::size_t max_scan, double first_sum_limit, double delta_sum) {
    long   best_scan = static_cast<long>(min_scan) - 1;
    double best_sum  = large;
    Index  centre    = npos;
    for (Index i = 0; i < m.size(); ++i) {
        if (!pool.available(i)) {
            continue;
        }
        const auto  ord       = pool.order(i);
        double      sum       = p1.sum_at[i];
        double      sum_limit = first_sum_limit;
        long        scan;
        std::size_t s;
        if (min_scan == 0) {
            scan = 0;
            s    = 0;
        } else {
            scan = static_cast<long>(min_scan) - 1;
            s    = p1.resume[i];
        }
        if (scan < static_cast<long>(max_scan)) {
            for (; s < ord.size(); ++s) {
                const auto j = ord[s];
                if (!pool.available(j)) {
                    continue;
                }
                ++scan;
                const bool extra = scan > static_cast<long>(min_scan);
                if (extra) {
                    sum += m(i, j);
                    sum_limit += delta_sum;
                }
                if (sum > sum_limit) {
                    // the rejected point is not part of C_i
                    if (extra) {
                        sum -= m(i, j);
                    }
                    --scan;
                    break;
                }
                if (scan >= static_cast<long>(max_scan)) {
                    break;
                }
            }
        }
        if (scan >= static_cast<long>(min_scan)) {
            if (scan > best_scan || (scan == best_scan && sum < best_sum)) {
                centre    = i;
                best_scan = scan;
                best_sum  = sum;
            }
        }
    }
    return {centre, static_cast<std::size_t>(best_scan)};
}

IntensityState run_adaptive(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                            const AdaptiveOptions& options, MeasureKind kind) {
    check_k(m, order, k);
    if (!(options.lambda >= 0.0 && options.lambda <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "lambda must lie in [0, 1]");
    }
    if (options.global_min_size < 2) {
        throw Error(ErrorCode::ConfigError, "global_min_size must be at least 2");
    }
    const SeparationMeasure measure{kind, 0.0};
    Pool                    pool(m, order);
    IntensityState          state;
    for (std::size_t k_o = k; k_o >= 1 && pool.n_o() > 0; --k_o) {
        const std::size_t n_o = pool.n_o();
        if (n_o == 1) {
            const Index only = pool.members().front();
            auto        c    = emit(pool, only, 0, k_o, measure, m);
            c.min_size = c.max_size = 1;
            state.clusters.push_back(std::move(c));
            continue;
        }
        const auto [min_size, max_size] = adaptive_size_bounds(n_o, k_o, options);
        const std::size_t min_scan      = min_size - 1;
        const std::size_t max_scan      = max_size - 1;

        const auto   p1             = phase1(m, pool, min_scan, options.lambda, kind);
        const double distance_limit = p1.best_distance + p1.target_gap;
        const double first_sum      = p1.best_sum + p1.target_gap;
        const auto   p2             = kind == MeasureKind::min_max
                                          ? phase2_minmax(m, pool, p1, min_scan, max_scan, distance_limit)
                                          : phase2_minsum(m, pool, p1, min_scan, max_scan, first_sum, distance_limit);

        auto c            = emit(pool, p2.centre, p2.best_scan, k_o, measure, m);
        c.min_size        = min_size;
        c.max_size        = max_size;
        c.target_gap      = p1.target_gap;
        c.distance_limit  = distance_limit;
        c.first_sum_limit = first_sum;
        state.clusters.push_back(std::move(c));
        if (pool.n_o() == 0 && k_o > 1) {
            state.absorbed = true;
        }
    }
    pool.finish(state);
    return state;
}

}  // namespace

IndexSet IntensityState::centroids() const {
    IndexSet out;
    for (const auto& c : clusters) {
        out.push_back(c.centroid);
    }
    return out;
}

std::vector<std::size_t> IntensityState::cluster_sizes() const {
    std::vector<std::size_t> out;
    for (const auto& c : clusters) {
        out.push_back(c.members.size());
    }
    return out;
}

IntensityState primary_minmax(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                              const PrimaryOptions& options) {
    return run_primary(m, order, k, options, MeasureKind::min_max);
}

IntensityState primary_minsum(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                              const PrimaryOptions& options) {
    return run_primary(m, order, k, options, MeasureKind::min_sum);
}

std::pair<std::size_t, std::size_t> adaptive_size_bounds(std::size_t n_o, std::size_t k_o,
                                                         const AdaptiveOptions& options) {
    if (k_o == 0 || n_o == 0) {
        throw Error(ErrorCode::InfeasibleBounds, "no points or clusters left");
    }
    const std::size_t min_size = ceil_div(n_o, k_o);
    if (options.allow_absorb) {
        return {min_size, n_o};
    }
    const auto n = static_cast<long long>(n_o);
    const auto r = static_cast<long long>(k_o) - 1;
    if (options.max_size_rule == MaxSizeRule::per_pseudocode) {
        const long long max_size = n - static_cast<long long>(min_size) * r;
        return {min_size, static_cast<std::size_t>(std::max<long long>(max_size, static_cast<long long>(min_size)))};
    }
    const long long max_size = n - static_cast<long long>(options.global_min_size) * r;
    if (max_size < static_cast<long long>(min_size)) {
        throw Error(ErrorCode::InfeasibleBounds, "MaxSize = " + std::to_string(max_size) + " < MinSize = " +
                                                     std::to_string(min_size) + " at n_o = " + std::to_string(n_o) +
                                                     ", k_o = " + std::to_string(k_o));
    }
    return {min_size, static_cast<std::size_t>(max_size)};
}

IntensityState adaptive_minmax(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                               const AdaptiveOptions& options) {
    return run_adaptive(m, order, k, options, MeasureKind::min_max);
}

IntensityState adaptive_minsum(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                               const AdaptiveOptions& options) {
    return run_adaptive(m, order, k, options, MeasureKind::min_sum);
}

// ---------------------------------------------------------------------------------------------

Clustering to_clustering(const IntensityState& state, const SeparationMeasure& measure, const DistanceMatrix& m) {
    const std::size_t        n = m.size();
    std::vector<IndexSet>    members;
    IndexSet                 centres;
    for (const auto& c : state.clusters) {
        members.push_back(c.members);
        centres.push_back(c.centroid);
    }
    if (centres.empty()) {
        throw Error(ErrorCode::NoCentroids, "intensity state holds no clusters");
    }
    for (const Index j : state.remaining) {
        std::size_t best = 0;
        for (std::size_t h = 1; h < centres.size(); ++h) {
            const double a = m(centres[h], j);
            const double b = m(centres[best], j);
            if (a < b || (a == b && centres[h] < centres[best])) {
                best = h;
            }
        }
        members[best].push_back(j);
    }
    std::vector<Cluster> clusters;
    for (std::size_t h = 0; h < centres.size(); ++h) {
        std::sort(members[h].begin(), members[h].end());
        Cluster c;
        c.members  = std::move(members[h]);
        c.centroid = centres[h];
        c.span     = separate(measure, c.centroid, c.members, m);
        auto pc    = pseudo_centroid(measure, c.members, m);
        if (std::binary_search(pc.all_centroids.begin(), pc.all_centroids.end(), c.centroid)) {
            c.all_centroids = std::move(pc.all_centroids);
        } else {
            c.all_centroids = {c.centroid};
        }
        clusters.push_back(std::move(c));
    }
    return make_clustering(std::move(clusters), n);
}

RefinementResult cluster_size_refinement(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                                         RefinementApproach approach, MeasureKind base,
                                         std::optional<std::size_t> interrupt_at, const EngineConfig& engine) {
    if (k < 2) {
        throw Error(ErrorCode::BadK, "cluster size refinement needs k >= 2");
    }
    auto run = [&](const PrimaryOptions& o) {
        return base == MeasureKind::min_max ? primary_minmax(m, order, k, o) : primary_minsum(m, order, k, o);
    };
    RefinementResult out;
    PrimaryOptions   first_options;
    first_options.interrupt_at = interrupt_at;
    out.first                  = run(first_options);

    EngineConfig cfg = engine;
    cfg.measure.kind = base;

    std::vector<std::size_t> sizes;
    if (interrupt_at) {
        // Step 2 restricted to N \ N_o: the clustered points choose among the emitted centroids.
        IntensityState clustered = out.first;
        clustered.remaining.clear();
        std::vector<std::size_t> count(clustered.clusters.size(), 0);
        const auto               centres = clustered.centroids();
        for (const auto& c : clustered.clusters) {
            for (const Index j : c.members) {
                const auto  own  = std::find(centres.begin(), centres.end(), j);
                std::size_t best = own == centres.end() ? 0 : static_cast<std::size_t>(own - centres.begin());
                for (std::size_t h = 0; h < centres.size() && own == centres.end(); ++h) {
                    const double a = m(centres[h], j);
                    const double b = m(centres[best], j);
                    if (a < b || (a == b && centres[h] < centres[best])) {
                        best = h;
                    }
                }
                ++count[best];
            }
        }
        for (const auto c : count) {
            if (c > 0) {
                sizes.push_back(c);
            }
        }
    } else {
        const auto start = to_clustering(out.first, cfg.measure, m);
        const auto after = approach == RefinementApproach::approach1
                               ? detail::step2(start, cfg, m)
                               : run_kpc(start, StartEntry::step2, cfg, m).final;
        for (const auto& c : after.clusters) {
            sizes.push_back(c.members.size());
        }
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<>());

    PrimaryOptions second_options;
    second_options.cluster_sizes = sizes;
    out.second                   = run(second_options);
    out.sizes                    = out.second.cluster_sizes();
    return out;
}

namespace {

double binomial(std::size_t n, std::size_t v) {
    double r = 1.0;
    for (std::size_t t = 1; t <= v; ++t) {
        r = r * static_cast<double>(n - v + t) / static_cast<double>(t);
    }
    return r;
}

}  // namespace

BestCluster brute_force_best_cluster(const DistanceMatrix& m, const IndexSet& pool, std::size_t v,
                                     const SeparationMeasure& measure) {
    if (v < 1 || v > pool.size()) {
        throw Error(ErrorCode::BadK, "subset size " + std::to_string(v) + " outside [1, " +
                                         std::to_string(pool.size()) + "]");
    }
    if (binomial(pool.size(), v) > max_brute_force_subsets) {
        throw Error(ErrorCode::CombinatorialBlowup, "C(" + std::to_string(pool.size()) + ", " + std::to_string(v) +
                                                        ") subsets exceed the enumeration guard");
    }
    IndexSet sorted = pool;
    std::sort(sorted.begin(), sorted.end());

    std::vector<std::size_t> idx(v);
    for (std::size_t t = 0; t < v; ++t) {
        idx[t] = t;
    }
    BestCluster best;
    bool        have = false;
    IndexSet    subset(v);
    for (;;) {
        for (std::size_t t = 0; t < v; ++t) {
            subset[t] = sorted[idx[t]];
        }
        const auto pc = pseudo_centroid(measure, subset, m);
        if (!have || pc.span < best.span) {
            best = {subset, pc.centroid, pc.span};
            have = true;
        }
        // next combination in lexicographic order
        std::size_t t = v;
        while (t > 0 && idx[t - 1] == sorted.size() - v + (t - 1)) {
            --t;
        }
        if (t == 0) {
            break;
        }
        ++idx[t - 1];
        for (std::size_t u = t; u < v; ++u) {
            idx[u] = idx[u - 1] + 1;
        }
    }
    return best;
}

}  // namespace pcc

#include "pcc/engine.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>

namespace pcc {

IndexSet Clustering::centroid_set(bool multi) const {
    IndexSet out;
    for (const auto& c : clusters) {
        if (multi) {
            out.insert(out.end(), c.all_centroids.begin(), c.all_centroids.end());
        } else {
            out.push_back(c.centroid);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void Clustering::validate(std::size_t n) const {
    if (assignment.size() != n) {
        throw std::logic_error("assignment size mismatch");
    }
    std::vector<bool> seen(n, false);
    for (std::size_t h = 0; h < clusters.size(); ++h) {
        const auto& c = clusters[h];
        if (c.members.empty()) {
            throw std::logic_error("empty cluster " + std::to_string(h));
        }
        if (!std::is_sorted(c.members.begin(), c.members.end())) {
            throw std::logic_error("unsorted members in cluster " + std::to_string(h));
        }
        for (const Index j : c.members) {
            if (j >= n || seen[j]) {
                throw std::logic_error("point " + std::to_string(j) + " duplicated or out of range");
            }
            seen[j] = true;
            if (assignment[j] != h) {
                throw std::logic_error("assignment disagrees with membership for point " + std::to_string(j));
            }
        }
        if (!std::binary_search(c.members.begin(), c.members.end(), c.centroid)) {
            throw std::logic_error("centroid outside its cluster " + std::to_string(h));
        }
        for (const Index i : c.all_centroids) {
            if (!std::binary_search(c.members.begin(), c.members.end(), i)) {
                throw std::logic_error("centroid set not contained in cluster " + std::to_string(h));
            }
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw std::logic_error("clusters do not cover every point");
    }
}

Clustering make_clustering(std::vector<Cluster> clusters, std::size_t n) {
    Clustering out;
    out.clusters = std::move(clusters);
    out.assignment.assign(n, npos);
    for (std::size_t h = 0; h < out.clusters.size(); ++h) {
        std::sort(out.clusters[h].members.begin(), out.clusters[h].members.end());
        for (const Index j : out.clusters[h].members) {
            out.assignment.at(j) = h;
        }
    }
    return out;
}

Clustering assign_to_centroid_sets(const std::vector<IndexSet>& centroid_sets, const DistanceMatrix& m,
                                   bool reassign_all) {
    const std::size_t n = m.size();
    if (centroid_sets.empty()) {
        throw Error(ErrorCode::NoCentroids, "no centroids given");
    }
    std::vector<std::size_t> owner(n, npos);
    for (std::size_t h = 0; h < centroid_sets.size(); ++h) {
        if (centroid_sets[h].empty()) {
            throw Error(ErrorCode::NoCentroids, "cluster " + std::to_string(h) + " has no centroid");
        }
        for (const Index i : centroid_sets[h]) {
            if (i >= n) {
                throw Error(ErrorCode::BadK, "centroid " + std::to_string(i) + " out of range");
            }
            if (owner[i] != npos) {
                throw Error(ErrorCode::DuplicateCentroid, "point " + std::to_string(i) + " used twice");
            }
            owner[i] = h;
        }
    }

    // retained[i]: i is a centroid that stays put. Absorption is decided in ascending index order
    // against clusters that still hold at least one retained centroid.
    std::vector<bool>        retained(n, false);
    std::vector<std::size_t> live_count(centroid_sets.size(), 0);
    for (std::size_t h = 0; h < centroid_sets.size(); ++h) {
        for (const Index i : centroid_sets[h]) {
            retained[i] = true;
        }
        live_count[h] = centroid_sets[h].size();
    }
    if (reassign_all) {
        for (Index i = 0; i < n; ++i) {
            if (owner[i] == npos) {
                continue;
            }
            const std::size_t own      = owner[i];
            double            own_best = 0.0;
            for (const Index c : centroid_sets[own]) {
                own_best = std::min(own_best, m(c, i));
            }
            bool absorbed = false;
            for (std::size_t h = 0; h < centroid_sets.size() && !absorbed; ++h) {
                if (h == own || live_count[h] == 0) {
                    continue;
                }
                for (const Index c : centroid_sets[h]) {
                    if (retained[c] && m(c, i) < own_best) {
                        absorbed = true;
                        break;
                    }
                }
            }
            if (absorbed) {
                retained[i] = false;
                --live_count[own];
            }
        }
    }

    IndexSet live_centroids;
    for (Index i = 0; i < n; ++i) {
        if (retained[i]) {
            live_centroids.push_back(i);
        }
    }

    std::vector<std::size_t> cluster_of(n, npos);
    for (const Index i : live_centroids) {
        cluster_of[i] = owner[i];
    }
    for (Index j = 0; j < n; ++j) {
        if (retained[j]) {
            continue;
        }
        Index  best  = npos;
        double bestd = 0.0;
        for (const Index c : live_centroids) {
            const double v = m(c, j);
            if (best == npos || v < bestd) {
                best  = c;
                bestd = v;
            }
        }
        cluster_of[j] = owner[best];
    }

    // Compact surviving clusters, preserving their original order.
    std::vector<std::size_t> remap(centroid_sets.size(), npos);
    std::vector<Cluster>     clusters;
    for (std::size_t h = 0; h < centroid_sets.size(); ++h) {
        if (live_count[h] > 0) {
            remap[h] = clusters.size();
            clusters.emplace_back();
        }
    }
    for (Index j = 0; j < n; ++j) {
        clusters[remap[cluster_of[j]]].members.push_back(j);
    }
    for (std::size_t h = 0; h < centroid_sets.size(); ++h) {
        if (remap[h] == npos) {
            continue;
        }
        Cluster& c = clusters[remap[h]];
        for (const Index i : centroid_sets[h]) {
            if (retained[i]) {
                c.all_centroids.push_back(i);
            }
        }
        std::sort(c.all_centroids.begin(), c.all_centroids.end());
        c.centroid = c.all_centroids.front();
    }
    return make_clustering(std::move(clusters), n);
}

namespace {

void refresh_spans(Clustering& c, const SeparationMeasure& measure, const DistanceMatrix& m) {
    for (auto& cl : c.clusters) {
        cl.span = separate(measure, cl.centroid, cl.members, m);
    }
}

std::vector<IndexSet> step2_sets(const Clustering& c, bool multi) {
    std::vector<IndexSet> sets;
    sets.reserve(c.clusters.size());
    for (const auto& cl : c.clusters) {
        sets.push_back(multi ? cl.all_centroids : IndexSet{cl.centroid});
    }
    return sets;
}

}  // namespace

Clustering assign_points(std::span<const Index> centroids, const DistanceMatrix& m, bool reassign_all) {
    std::vector<IndexSet> sets;
    sets.reserve(centroids.size());
    for (const Index i : centroids) {
        sets.push_back({i});
    }
    auto out = assign_to_centroid_sets(sets, m, reassign_all);
    refresh_spans(out, SeparationMeasure{}, m);
    return out;
}

Clustering recompute_centroids(const Clustering& c, const EngineConfig& cfg, const DistanceMatrix& m) {
    Clustering out = c;
    for (auto& cl : out.clusters) {
        auto pc          = pseudo_centroid(cfg.measure, cl.members, m);
        cl.centroid      = pc.centroid;
        cl.span          = pc.span;
        cl.all_centroids = std::move(pc.all_centroids);
    }
    return out;
}

namespace detail {

Clustering step2(const Clustering& step1, const EngineConfig& cfg, const DistanceMatrix& m) {
    auto out = assign_to_centroid_sets(step2_sets(step1, cfg.multi_centroid), m, cfg.reassign_all);
    refresh_spans(out, cfg.measure, m);
    return out;
}

}  // namespace detail

std::pair<Clustering, bool> kpc_iterate(const Clustering& c, const EngineConfig& cfg, const DistanceMatrix& m) {
    const auto before  = c.centroid_set(cfg.multi_centroid);
    auto       s1      = recompute_centroids(c, cfg, m);
    const bool changed = s1.centroid_set(cfg.multi_centroid) != before;
    return {detail::step2(s1, cfg, m), changed};
}

double span_objective(const Clustering& c, Objective mode) {
    double total = 0.0;
    for (const auto& cl : c.clusters) {
        switch (mode) {
            case Objective::span_sum: total += cl.span; break;
            case Objective::span_sum_squared: total += cl.span * cl.span; break;
            case Objective::span_mean_sum: total += cl.span / static_cast<double>(cl.members.size()); break;
        }
    }
    return total;
}

// ---------------------------------------------------------------------------------------------

MaxDistState make_max_dist_state(std::span<const Index> members, const DistanceMatrix& m) {
    MaxDistState st;
    st.members.assign(members.begin(), members.end());
    std::sort(st.members.begin(), st.members.end());
    st.max_dist.assign(st.members.size(), 0.0);
    st.match.assign(st.members.size(), npos);
    for (std::size_t a = 0; a < st.members.size(); ++a) {
        const Index i = st.members[a];
        for (const Index j : st.members) {
            if (j == i) {
                continue;
            }
            if (st.match[a] == npos || m(i, j) > st.max_dist[a]) {
                st.max_dist[a] = m(i, j);
                st.match[a]    = j;
            }
        }
    }
    return st;
}

namespace {

template <typename Values>
CentroidResult argmin_result(const IndexSet& members, const Values& values) {
    if (members.empty()) {
        throw Error(ErrorCode::EmptyCluster, "empty cluster state");
    }
    CentroidResult r;
    r.centroid = members.front();
    r.span     = values.front();
    for (std::size_t a = 1; a < members.size(); ++a) {
        if (values[a] < r.span) {
            r.span     = values[a];
            r.centroid = members[a];
        }
    }
    for (std::size_t a = 0; a < members.size(); ++a) {
        if (values[a] == r.span) {
            r.all_centroids.push_back(members[a]);
        }
    }
    return r;
}

bool contains(std::span<const Index> sorted, Index v) {
    return std::binary_search(sorted.begin(), sorted.end(), v);
}

}  // namespace

CentroidResult centroid_from_state(const MaxDistState& state) { return argmin_result(state.members, state.max_dist); }
CentroidResult centroid_from_state(const SumDistState& state) { return argmin_result(state.members, state.sums); }

CentroidResult accelerated_minmax_update(MaxDistState& state, std::span<const Index> new_members,
                                         std::span<const Index> added, const DistanceMatrix& m) {
    IndexSet next(new_members.begin(), new_members.end());
    std::sort(next.begin(), next.end());
    IndexSet plus(added.begin(), added.end());
    std::sort(plus.begin(), plus.end());

    const auto expected = set_delta(state.members, next);
    if (expected.added != plus) {
        throw Error(ErrorCode::InconsistentSets, "added set does not match the membership change");
    }
    const auto   current = centroid_from_state(state);
    const auto   it      = std::lower_bound(state.members.begin(), state.members.end(), current.centroid);
    const Index  j_star  = state.match[static_cast<std::size_t>(it - state.members.begin())];
    if (j_star != npos && !contains(next, j_star)) {
        throw Error(ErrorCode::MatchPointDropped, "match point " + std::to_string(j_star) + " left the cluster");
    }

    MaxDistState out;
    out.members = next;
    out.max_dist.assign(next.size(), 0.0);
    out.match.assign(next.size(), npos);
    auto rescan = [&](std::size_t b) {
        const Index i = next[b];
        out.match[b]  = npos;
        for (const Index j : next) {
            if (j != i && (out.match[b] == npos || m(i, j) > out.max_dist[b])) {
                out.max_dist[b] = m(i, j);
                out.match[b]    = j;
            }
        }
    };
    std::size_t a = 0;
    for (std::size_t b = 0; b < next.size(); ++b) {
        const Index i = next[b];
        while (a < state.members.size() && state.members[a] < i) {
            ++a;
        }
        const bool retained = a < state.members.size() && state.members[a] == i;
        if (!retained) {
            rescan(b);
            continue;
        }
        const Index old_match = state.match[a];
        if (old_match != npos && !contains(next, old_match)) {
            rescan(b);
            continue;
        }
        out.max_dist[b] = state.max_dist[a];
        out.match[b]    = old_match;
        for (const Index j : plus) {
            if (out.match[b] == npos || m(i, j) > out.max_dist[b]) {
                out.max_dist[b] = m(i, j);
                out.match[b]    = j;
            }
        }
    }
    state = std::move(out);
    return centroid_from_state(state);
}

SetDelta set_delta(std::span<const Index> before, std::span<const Index> after) {
    IndexSet a(before.begin(), before.end());
    IndexSet b(after.begin(), after.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    SetDelta d;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(d.kept));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(d.added));
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(d.removed));
    return d;
}

SumDistState make_sum_dist_state(std::span<const Index> members, const DistanceMatrix& m) {
    SumDistState st;
    st.members.assign(members.begin(), members.end());
    std::sort(st.members.begin(), st.members.end());
    st.sums.assign(st.members.size(), 0.0);
    for (std::size_t a = 0; a < st.members.size(); ++a) {
        for (const Index j : st.members) {
            st.sums[a] += m(st.members[a], j);
        }
    }
    return st;
}

SumDistState accelerated_minsum_update(const SumDistState& prev, const SetDelta& delta, const DistanceMatrix& m) {
    const bool sorted = std::is_sorted(delta.kept.begin(), delta.kept.end()) &&
                        std::is_sorted(delta.added.begin(), delta.added.end()) &&
                        std::is_sorted(delta.removed.begin(), delta.removed.end());
    IndexSet old_union;
    std::set_union(delta.kept.begin(), delta.kept.end(), delta.removed.begin(), delta.removed.end(),
                   std::back_inserter(old_union));
    IndexSet overlap;
    std::set_intersection(delta.added.begin(), delta.added.end(), prev.members.begin(), prev.members.end(),
                          std::back_inserter(overlap));
    if (!sorted || old_union != prev.members || old_union.size() != delta.kept.size() + delta.removed.size() ||
        !overlap.empty() || prev.sums.size() != prev.members.size()) {
        throw Error(ErrorCode::InconsistentSets, "C0/C+/C- do not describe a change of the saved cluster");
    }

    SumDistState out;
    std::set_union(delta.kept.begin(), delta.kept.end(), delta.added.begin(), delta.added.end(),
                   std::back_inserter(out.members));
    out.sums.assign(out.members.size(), 0.0);
    std::size_t a = 0;
    for (std::size_t b = 0; b < out.members.size(); ++b) {
        const Index i = out.members[b];
        while (a < prev.members.size() && prev.members[a] < i) {
            ++a;
        }
        if (a < prev.members.size() && prev.members[a] == i) {
            double s = prev.sums[a];
            for (const Index j : delta.added) {
                s += m(i, j);
            }
            for (const Index j : delta.removed) {
                s -= m(i, j);
            }
            out.sums[b] = s;
        } else {
            for (const Index j : out.members) {
                out.sums[b] += m(i, j);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

namespace {

// Step 1 with optional incremental state carried between iterations, keyed by cluster position.
class Step1Runner {
  public:
    Step1Runner(const EngineConfig& cfg, const DistanceMatrix& m) : cfg_(cfg), m_(m) {}

    Clustering operator()(const Clustering& p) {
        if (!cfg_.use_accelerated_update) {
            return recompute_centroids(p, cfg_, m_);
        }
        const bool fresh = max_states_.size() + sum_states_.size() != p.size();
        if (fresh) {
            max_states_.clear();
            sum_states_.clear();
        }
        Clustering out = p;
        for (std::size_t h = 0; h < p.size(); ++h) {
            auto&          cl = out.clusters[h];
            CentroidResult r;
            if (cfg_.measure.kind == MeasureKind::min_max) {
                if (fresh) {
                    max_states_.push_back(make_max_dist_state(cl.members, m_));
                    r = centroid_from_state(max_states_.back());
                } else {
                    const auto delta = set_delta(max_states_[h].members, cl.members);
                    try {
                        r = accelerated_minmax_update(max_states_[h], cl.members, delta.added, m_);
                    } catch (const Error& e) {
                        if (e.code() != ErrorCode::MatchPointDropped) {
                            throw;
                        }
                        max_states_[h] = make_max_dist_state(cl.members, m_);
                        r              = centroid_from_state(max_states_[h]);
                    }
                }
            } else {
                if (fresh) {
                    sum_states_.push_back(make_sum_dist_state(cl.members, m_));
                } else {
                    sum_states_[h] =
                        accelerated_minsum_update(sum_states_[h], set_delta(sum_states_[h].members, cl.members), m_);
                }
                r = centroid_from_state(sum_states_[h]);
            }
            cl.centroid      = r.centroid;
            cl.span          = r.span;
            cl.all_centroids = std::move(r.all_centroids);
        }
        return out;
    }

  private:
    const EngineConfig&       cfg_;
    const DistanceMatrix&     m_;
    std::vector<MaxDistState> max_states_;
    std::vector<SumDistState> sum_states_;
};

// Partition plus carried centroids; two iterates with equal signatures evolve identically.
struct Signature {
    std::vector<std::size_t> assignment;
    IndexSet                 centroids;
    bool operator==(const Signature&) const = default;
};

Signature signature_of(const Clustering& c, bool multi) {
    // Canonical labels: clusters renumbered by their smallest member.
    std::vector<std::size_t> order(c.size());
    for (std::size_t h = 0; h < c.size(); ++h) {
        order[h] = h;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return c.clusters[a].members.front() < c.clusters[b].members.front(); });
    std::vector<std::size_t> relabel(c.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        relabel[order[r]] = r;
    }
    Signature s;
    s.assignment.reserve(c.assignment.size());
    for (const auto h : c.assignment) {
        s.assignment.push_back(relabel[h]);
    }
    s.centroids = c.centroid_set(multi);
    return s;
}

// `after` was produced by Step 2 from a clustering with the same membership as `before`; each
// of its clusters descends from the cluster of `before` that held its carried centroid.
std::size_t count_moves(const Clustering& before, const Clustering& after) {
    std::vector<std::size_t> origin(after.size());
    for (std::size_t h = 0; h < after.size(); ++h) {
        origin[h] = before.assignment[after.clusters[h].centroid];
    }
    std::size_t moved = 0;
    for (std::size_t j = 0; j < before.assignment.size(); ++j) {
        if (origin[after.assignment[j]] != before.assignment[j]) {
            ++moved;
        }
    }
    return moved;
}

class PlainStep2 final : public detail::Step2Policy {
  public:
    PlainStep2(const EngineConfig& cfg, const DistanceMatrix& m) : cfg_(cfg), m_(m) {}
    std::pair<Clustering, std::size_t> apply(const Clustering& s1, std::size_t) override {
        auto next = detail::step2(s1, cfg_, m_);
        return {next, count_moves(s1, next)};
    }

  private:
    const EngineConfig&   cfg_;
    const DistanceMatrix& m_;
};

}  // namespace

namespace detail {

RunReport drive(Clustering start, const EngineConfig& cfg, const DistanceMatrix& m, Step2Policy& policy) {
    if (cfg.max_iterations < 1) {
        throw Error(ErrorCode::ConfigError, "max_iterations must be at least 1");
    }
    RunReport  report;
    Step1Runner step1(cfg, m);

    Clustering current = std::move(start);
    Clustering s1      = step1(current);
    report.initial_cluster_count = current.size();
    report.objective_trace.push_back(span_objective(s1, cfg.objective));
    if (cfg.record_trajectory) {
        report.trajectory.push_back(current);
    }

    std::deque<Signature> history;
    history.push_back(signature_of(current, cfg.multi_centroid));

    report.terminated_by = StopReason::iteration_cap;
    while (report.iterations < cfg.max_iterations) {
        const bool changed     = s1.centroid_set(cfg.multi_centroid) != current.centroid_set(cfg.multi_centroid);
        auto [next, moved_count] = policy.apply(s1, report.iterations);
        const auto moved         = count_moves(current, next);
        auto       next_s1       = step1(next);
        const double objective   = span_objective(next_s1, cfg.objective);

        if (cfg.termination == Termination::objective_local_min && objective > report.objective_trace.back()) {
            report.rejected_objective = objective;
            report.terminated_by      = StopReason::local_min;
            break;
        }
        ++report.iterations;
        report.objective_trace.push_back(objective);
        report.reassigned_counts.push_back(moved);
        report.selected_counts.push_back(moved_count);
        if (cfg.record_trajectory) {
            report.trajectory.push_back(next);
        }
        const bool moved_any = moved > 0 || next.size() != current.size();
        current              = std::move(next);
        s1                   = std::move(next_s1);
        if (!changed && !moved_any) {
            report.terminated_by = StopReason::fixed_point;
            break;
        }
        auto sig = signature_of(current, cfg.multi_centroid);
        if (std::find(history.begin(), history.end(), sig) != history.end()) {
            // A repeated state (other than the fixed point) means the iteration cycles.
            report.terminated_by = StopReason::iteration_cap;
            break;
        }
        history.push_back(std::move(sig));
        if (history.size() > 4) {
            history.pop_front();
        }
    }
    report.final = std::move(s1);
    return report;
}

}  // namespace detail

RunReport run_kpc(std::span<const Index> initial_centroids, const EngineConfig& cfg, const DistanceMatrix& m) {
    if (initial_centroids.empty() || initial_centroids.size() > m.size()) {
        throw Error(ErrorCode::BadK, "k must be in [1, n]");
    }
    PlainStep2 policy(cfg, m);
    auto       start = assign_points(initial_centroids, m, cfg.reassign_all);
    refresh_spans(start, cfg.measure, m);
    return detail::drive(std::move(start), cfg, m, policy);
}

RunReport run_kpc(const Clustering& start, StartEntry entry, const EngineConfig& cfg, const DistanceMatrix& m) {
    if (start.size() == 0 || start.size() > m.size()) {
        throw Error(ErrorCode::BadK, "k must be in [1, n]");
    }
    start.validate(m.size());
    PlainStep2 policy(cfg, m);
    if (entry == StartEntry::step2) {
        return detail::drive(policy.apply(start, 0).first, cfg, m, policy);
    }
    return detail::drive(start, cfg, m, policy);
}

}  // namespace pcc

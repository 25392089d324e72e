#include "pcc/regret.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace pcc {

namespace {

std::vector<IndexSet> centroid_sets(const Clustering& c, bool multi) {
    std::vector<IndexSet> sets;
    for (const auto& cl : c.clusters) {
        sets.push_back(multi ? cl.all_centroids : IndexSet{cl.centroid});
    }
    return sets;
}

// Rebuilds a clustering with new memberships while keeping every cluster's centroid sets.
Clustering regroup(const Clustering& c, const std::vector<std::size_t>& cluster_of, bool multi,
                   const SeparationMeasure& measure, const DistanceMatrix& m) {
    std::vector<Cluster> clusters(c.size());
    for (std::size_t h = 0; h < c.size(); ++h) {
        clusters[h].centroid      = c.clusters[h].centroid;
        clusters[h].all_centroids = multi ? c.clusters[h].all_centroids : IndexSet{c.clusters[h].centroid};
    }
    for (Index j = 0; j < cluster_of.size(); ++j) {
        clusters[cluster_of[j]].members.push_back(j);
    }
    for (auto& cl : clusters) {
        cl.span = separate(measure, cl.centroid, cl.members, m);
    }
    return make_clustering(std::move(clusters), m.size());
}

void require_two(const Clustering& c) {
    if (c.size() < 2) {
        throw Error(ErrorCode::SingleCluster, "at least two clusters are needed");
    }
}

void check_fraction(double f, bool allow_zero) {
    if (!(f <= 1.0) || !(allow_zero ? f >= 0.0 : f > 0.0)) {
        throw Error(ErrorCode::BadFraction, "fraction " + std::to_string(f) + " outside " +
                                                (allow_zero ? "[0, 1]" : "(0, 1]"));
    }
}

}  // namespace

std::vector<RegretEntry> regret_candidates(const Clustering& step1, const EngineConfig& cfg,
                                           const DistanceMatrix& m) {
    const auto        sets = centroid_sets(step1, cfg.multi_centroid);
    const std::size_t n    = m.size();
    std::vector<bool> is_centroid(n, false);
    IndexSet          all;
    for (const auto& s : sets) {
        for (const Index i : s) {
            is_centroid[i] = true;
            all.push_back(i);
        }
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> owner(n, npos);
    for (std::size_t h = 0; h < sets.size(); ++h) {
        for (const Index i : sets[h]) {
            owner[i] = h;
        }
    }

    std::vector<RegretEntry> out;
    for (Index j = 0; j < n; ++j) {
        if (is_centroid[j]) {
            continue;
        }
        const std::size_t h = step1.assignment[j];
        // Step 2 target: nearest centroid, lowest index on ties.
        Index nearest = all.front();
        for (const Index i : all) {
            if (m(i, j) < m(nearest, j)) {
                nearest = i;
            }
        }
        if (owner[nearest] == h) {
            continue;
        }
        RegretEntry e;
        e.point  = j;
        e.assign = sets[h].front();
        for (const Index i : sets[h]) {
            if (m(i, j) < m(e.assign, j)) {
                e.assign = i;
            }
        }
        e.reassign = nearest;
        e.a_dist   = m(e.assign, j);
        e.r_dist   = m(nearest, j);
        e.regret   = e.a_dist - e.r_dist;
        e.target   = owner[nearest];
        out.push_back(e);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const RegretEntry& a, const RegretEntry& b) { return a.regret > b.regret; });
    return out;
}

std::pair<Clustering, std::size_t> regret_step(const Clustering& step1, const EngineConfig& cfg,
                                               const DistanceMatrix& m, double fraction, std::size_t max_select) {
    check_fraction(fraction, false);
    const auto candidates = regret_candidates(step1, cfg, m);
    std::vector<std::size_t> cluster_of = step1.assignment;
    std::size_t              selected   = 0;
    if (!candidates.empty()) {
        const auto r = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(candidates.size()) - 1e-12)));
        const double threshold = candidates[std::min(r, candidates.size()) - 1].regret;
        for (const auto& e : candidates) {
            if (e.regret < threshold || selected == max_select) {
                break;
            }
            cluster_of[e.point] = e.target;
            ++selected;
        }
    }
    return {regroup(step1, cluster_of, cfg.multi_centroid, cfg.measure, m), selected};
}

double FSchedule::at(std::size_t iteration) const {
    if (iteration >= ramp) {
        return end;
    }
    return start + (end - start) * static_cast<double>(iteration) / static_cast<double>(ramp);
}

void FSchedule::validate() const {
    check_fraction(start, false);
    check_fraction(end, false);
}

namespace {

class RegretPolicy final : public detail::Step2Policy {
  public:
    RegretPolicy(const EngineConfig& cfg, const DistanceMatrix& m, const FSchedule& s, std::size_t cap)
      : cfg_(cfg), m_(m), schedule_(s), cap_(cap) {}

    std::pair<Clustering, std::size_t> apply(const Clustering& s1, std::size_t iteration) override {
        return regret_step(s1, cfg_, m_, schedule_.at(iteration), cap_);
    }

  private:
    const EngineConfig&   cfg_;
    const DistanceMatrix& m_;
    FSchedule             schedule_;
    std::size_t           cap_;
};

}  // namespace

RunReport run_regret_threshold(std::span<const Index> initial_centroids, const EngineConfig& cfg,
                               const DistanceMatrix& m, const FSchedule& schedule, std::size_t max_select) {
    if (initial_centroids.empty() || initial_centroids.size() > m.size()) {
        throw Error(ErrorCode::BadK, "k must be in [1, n]");
    }
    schedule.validate();
    auto start = assign_points(initial_centroids, m, cfg.reassign_all);
    for (auto& cl : start.clusters) {
        cl.span = separate(cfg.measure, cl.centroid, cl.members, m);
    }
    RegretPolicy policy(cfg, m, schedule, max_select);
    return detail::drive(std::move(start), cfg, m, policy);
}

RunReport run_regret_threshold(const Clustering& start, StartEntry entry, const EngineConfig& cfg,
                               const DistanceMatrix& m, const FSchedule& schedule, std::size_t max_select) {
    if (start.size() == 0 || start.size() > m.size()) {
        throw Error(ErrorCode::BadK, "k must be in [1, n]");
    }
    schedule.validate();
    start.validate(m.size());
    RegretPolicy policy(cfg, m, schedule, max_select);
    if (entry == StartEntry::step2) {
        return detail::drive(policy.apply(start, 0).first, cfg, m, policy);
    }
    return detail::drive(start, cfg, m, policy);
}

// ---------------------------------------------------------------------------------------------

namespace {

struct Distances {
    std::vector<double>      d1, d2;
    std::vector<bool>        is_centroid;
};

Distances first_second(const Clustering& c, const DistanceMatrix& m, bool multi) {
    const auto        sets = centroid_sets(c, multi);
    const std::size_t n    = m.size();
    Distances         out;
    out.d1.assign(n, 0.0);
    out.d2.assign(n, 0.0);
    out.is_centroid.assign(n, false);
    for (const auto& s : sets) {
        for (const Index i : s) {
            out.is_centroid[i] = true;
        }
    }
    for (Index j = 0; j < n; ++j) {
        const std::size_t h  = c.assignment[j];
        double            d1 = std::numeric_limits<double>::infinity();
        double            d2 = d1;
        for (std::size_t g = 0; g < sets.size(); ++g) {
            for (const Index i : sets[g]) {
                (g == h ? d1 : d2) = std::min(g == h ? d1 : d2, m(i, j));
            }
        }
        out.d1[j] = d1;
        out.d2[j] = d2;
    }
    return out;
}

}  // namespace

QualityReport quality(const Clustering& c, const DistanceMatrix& m, const QualityOptions& options) {
    require_two(c);
    const auto  dist = first_second(c, m, options.use_all_centroids);
    QualityReport q;
    q.d1  = dist.d1;
    q.d2  = dist.d2;
    q.d_o.assign(m.size(), 0.0);
    for (Index j = 0; j < m.size(); ++j) {
        if (dist.is_centroid[j]) {
            if (options.convention == CentroidConvention::include) {
                q.d1[j]  = 0.0;
                q.d_o[j] = q.d2[j];
            }
        } else {
            q.d_o[j] = q.d2[j] - q.d1[j];
        }
    }
    for (const auto& cl : c.clusters) {
        double      sum     = 0.0;
        std::size_t plain   = 0;
        for (const Index j : cl.members) {
            sum += q.d_o[j];
            plain += dist.is_centroid[j] ? 0 : 1;
        }
        const std::size_t denom = options.denominator == Denominator::cluster_size ? cl.members.size() : plain;
        const double      top   = options.accent == Accent::mean ? sum : sum * sum;
        const double      mean  = denom == 0 ? 0.0 : top / static_cast<double>(denom);
        q.cluster_d_o.push_back(sum);
        q.cluster_mean.push_back(mean);
        q.value += mean;
    }
    return q;
}

namespace {

// Cluster position chosen for j by the restart mode, among clusters other than its own.
std::size_t restart_target(const Clustering& c, const std::vector<IndexSet>& sets, const DistanceMatrix& m, Index j,
                           RestartMode mode) {
    const std::size_t                         h = c.assignment[j];
    std::vector<std::pair<double, std::size_t>> ranked;  // (min distance, cluster)
    for (std::size_t g = 0; g < sets.size(); ++g) {
        if (g == h) {
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        for (const Index i : sets[g]) {
            best = std::min(best, m(i, j));
        }
        ranked.emplace_back(best, g);
    }
    // Ties on distance go to the cluster holding the lowest-index centroid at that distance.
    auto tie_key = [&](const std::pair<double, std::size_t>& r) {
        Index lo = npos;
        for (const Index i : sets[r.second]) {
            if (m(i, j) == r.first) {
                lo = std::min(lo, i);
            }
        }
        return lo;
    };
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : tie_key(a) < tie_key(b);
    });
    switch (mode) {
        case RestartMode::second: return ranked.front().second;
        case RestartMode::third: return ranked[std::min<std::size_t>(1, ranked.size() - 1)].second;
        case RestartMode::farthest: {
            // Farthest centroid; ties go to the lowest index.
            std::size_t best_g = ranked.front().second;
            double      best_d = -std::numeric_limits<double>::infinity();
            Index       best_i = npos;
            for (std::size_t g = 0; g < sets.size(); ++g) {
                if (g == h) {
                    continue;
                }
                for (const Index i : sets[g]) {
                    if (m(i, j) > best_d || (m(i, j) == best_d && i < best_i)) {
                        best_d = m(i, j), best_i = i, best_g = g;
                    }
                }
            }
            return best_g;
        }
    }
    return ranked.front().second;
}

}  // namespace

Clustering diversified_restart(const Clustering& c, const EngineConfig& cfg, const DistanceMatrix& m,
                               RestartMode mode, double partial_fraction) {
    require_two(c);
    check_fraction(partial_fraction, true);
    const auto sets = centroid_sets(c, cfg.multi_centroid);
    const auto dist = first_second(c, m, cfg.multi_centroid);

    std::vector<Index> eligible;
    for (Index j = 0; j < m.size(); ++j) {
        if (!dist.is_centroid[j]) {
            eligible.push_back(j);
        }
    }
    // Largest d_o stay where they are.
    std::stable_sort(eligible.begin(), eligible.end(), [&](Index a, Index b) {
        return dist.d2[a] - dist.d1[a] < dist.d2[b] - dist.d1[b];
    });
    const auto count = static_cast<std::size_t>(std::lround(partial_fraction * static_cast<double>(eligible.size())));

    auto cluster_of = c.assignment;
    for (std::size_t t = 0; t < count; ++t) {
        cluster_of[eligible[t]] = restart_target(c, sets, m, eligible[t], mode);
    }
    return regroup(c, cluster_of, cfg.multi_centroid, cfg.measure, m);
}

Clustering stochastic_restart(const Clustering& c, const EngineConfig& cfg, const DistanceMatrix& m, double cutoff,
                              std::uint64_t rng_seed) {
    require_two(c);
    const auto sets = centroid_sets(c, cfg.multi_centroid);
    const auto dist = first_second(c, m, cfg.multi_centroid);

    double      pos_sum   = 0.0;
    std::size_t pos_count = 0;
    for (Index j = 0; j < m.size(); ++j) {
        const double d_o = dist.d2[j] - dist.d1[j];
        if (!dist.is_centroid[j] && d_o > 0.0) {
            pos_sum += d_o;
            ++pos_count;
        }
    }
    const double scale = pos_count == 0 ? 1.0 : pos_sum / static_cast<double>(pos_count);

    std::mt19937_64                        rng(rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto                                   cluster_of = c.assignment;
    for (Index j = 0; j < m.size(); ++j) {
        if (dist.is_centroid[j]) {
            continue;
        }
        const double d_o = dist.d2[j] - dist.d1[j];
        if (d_o > cutoff) {
            continue;
        }
        const double p = std::min(1.0, 1.0 / (1.0 + d_o / scale));
        if (unit(rng) < p) {
            cluster_of[j] = restart_target(c, sets, m, j, RestartMode::second);
        }
    }
    return regroup(c, cluster_of, cfg.multi_centroid, cfg.measure, m);
}

}  // namespace pcc

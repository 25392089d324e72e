#include "pcc/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace pcc {

namespace {

constexpr double inf     = std::numeric_limits<double>::infinity();
constexpr Index  no_pick = std::numeric_limits<Index>::max();

// Incremental MinD / MaxD / SumD bookkeeping for a growing H_o. Each addition costs O(n).
class SeedBuilder {
  public:
    explicit SeedBuilder(const DistanceMatrix& m)
      : m_(m), in_h_(m.size(), false), min_d_(m.size(), inf), max_d_(m.size(), -inf), sum_d_(m.size(), 0.0) {}

    void add(Index i) {
        if (!chosen_.empty()) {
            trace_.push_back(min_d_[i]);
        }
        chosen_.push_back(i);
        in_h_[i] = true;
        for (Index j = 0; j < m_.size(); ++j) {
            const double v = m_(j, i);
            min_d_[j]      = std::min(min_d_[j], v);
            max_d_[j]      = std::max(max_d_[j], v);
            sum_d_[j] += v;
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return chosen_.size(); }
    [[nodiscard]] bool in_h(Index i) const noexcept { return in_h_[i]; }
    [[nodiscard]] double min_d(Index i) const noexcept { return min_d_[i]; }
    [[nodiscard]] double max_d(Index i) const noexcept { return max_d_[i]; }
    [[nodiscard]] double sum_d(Index i) const noexcept { return sum_d_[i]; }

    // Lowest-index candidate minimizing `key` among candidates passing `admit`.
    template <typename Key, typename Admit>
    Index argmin(Key&& key, Admit&& admit) const {
        Index  best  = npos_;
        double bestv = inf;
        for (Index i = 0; i < m_.size(); ++i) {
            if (in_h_[i] || !admit(i)) {
                continue;
            }
            const double v = key(i);
            if (best == npos_ || v < bestv) {
                best  = i;
                bestv = v;
            }
        }
        return best;
    }

    template <typename Key>
    Index argmin(Key&& key) const {
        return argmin(std::forward<Key>(key), [](Index) { return true; });
    }

    DiversityState finish() const {
        DiversityState st;
        st.chosen     = chosen_;
        st.mind_trace = trace_;
        for (Index i = 0; i < m_.size(); ++i) {
            if (!in_h_[i]) {
                st.remaining.push_back(i);
            }
        }
        return st;
    }

  private:
    static constexpr Index npos_ = std::numeric_limits<Index>::max();

    const DistanceMatrix& m_;
    std::vector<bool>     in_h_;
    std::vector<double>   min_d_;
    std::vector<double>   max_d_;
    std::vector<double>   sum_d_;
    IndexSet              chosen_;
    std::vector<double>   trace_;
};

void check_k(const DistanceMatrix& m, std::size_t k, std::size_t min_k) {
    if (k < min_k || k > m.size()) {
        throw Error(ErrorCode::BadK, "k = " + std::to_string(k) + " outside [" + std::to_string(min_k) + ", " +
                                         std::to_string(m.size()) + "]");
    }
}

void check_seed(const DistanceMatrix& m, Index seed) {
    if (seed >= m.size()) {
        throw Error(ErrorCode::BadK, "seed point " + std::to_string(seed) + " out of range");
    }
}

// Continues greedy max-min selection from `prefix` up to k seeds.
DiversityState extend_maxmin(const DistanceMatrix& m, const IndexSet& prefix, std::size_t k) {
    SeedBuilder b(m);
    for (const Index i : prefix) {
        b.add(i);
    }
    while (b.size() < k) {
        b.add(b.argmin([&](Index i) { return -b.min_d(i); }));
    }
    return b.finish();
}

Index restart_seed(const IndexSet& chosen, RestartPick pick) {
    if (pick == RestartPick::last) {
        return chosen.back();
    }
    const auto k   = static_cast<double>(chosen.size());
    const auto pos = std::max<long>(2, std::lround((k - 1.0) / 2.0));
    return chosen[static_cast<std::size_t>(std::min<long>(pos, static_cast<long>(chosen.size()))) - 1];
}

// Core Algorithm: keep re-seeding while the final MaxMin improves; recover the best pass.
DiversityState refine_loop(const DistanceMatrix& m, std::size_t k, DiversityState first, RestartPick pick,
                           std::size_t max_passes) {
    double              previous = -inf;
    DiversityState      best;
    std::vector<double> history;
    DiversityState      current = std::move(first);
    std::size_t         passes  = 1;
    for (;;) {
        const double maxmin = current.mind_trace.back();
        history.push_back(maxmin);
        if (maxmin <= previous) {
            break;
        }
        previous = maxmin;
        best     = current;
        if (passes >= max_passes) {
            break;
        }
        current = simple_diversity(m, k, restart_seed(current.chosen, pick));
        ++passes;
    }
    best.maxmin_history = std::move(history);
    best.passes         = passes;
    return best;
}

}  // namespace

DiversityState simple_diversity(const DistanceMatrix& m, std::size_t k, Index seed_point) {
    check_k(m, k, 1);
    check_seed(m, seed_point);
    return extend_maxmin(m, {seed_point}, k);
}

DiversityState refined_diversity(const DistanceMatrix& m, std::size_t k, Index seed_point, RestartPick pick,
                                 std::size_t max_passes) {
    check_k(m, k, 2);
    check_seed(m, seed_point);
    return refine_loop(m, k, simple_diversity(m, k, seed_point), pick, std::max<std::size_t>(1, max_passes));
}

DiversityState compound_diversity(const DistanceMatrix& m, std::size_t k, std::size_t k_check, Index seed_point,
                                  std::size_t max_passes) {
    check_k(m, k, 3);
    check_seed(m, seed_point);
    if (k_check < 2 || k_check + 1 > k) {
        throw Error(ErrorCode::BadKCheck, "k_check must lie in [2, k-1]");
    }
    max_passes       = std::max<std::size_t>(1, max_passes);
    const auto stage = refine_loop(m, k_check, simple_diversity(m, k_check, seed_point), RestartPick::last, max_passes);
    auto       out   = refine_loop(m, k, extend_maxmin(m, stage.chosen, k), RestartPick::last, max_passes);
    out.passes += stage.passes;
    return out;
}

double derive_target(const std::vector<double>& mind_trace, TargetRule rule) {
    if (mind_trace.empty()) {
        throw Error(ErrorCode::ConfigError, "cannot derive a target from an empty MinD trace");
    }
    if (rule == TargetRule::mean) {
        return std::accumulate(mind_trace.begin(), mind_trace.end(), 0.0) / static_cast<double>(mind_trace.size());
    }
    auto v = mind_trace;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

DiversityState targeted_simple(const DistanceMatrix& m, std::size_t k, const TargetSpec& target_spec, Index seed_point) {
    check_k(m, k, 2);
    check_seed(m, seed_point);
    if (!std::isfinite(target_spec.target)) {
        throw Error(ErrorCode::ConfigError, "target T must be finite");
    }
    SeedBuilder b(m);
    b.add(seed_point);
    while (b.size() < k) {
        b.add(b.argmin([&](Index i) { return std::abs(b.min_d(i) - target_spec.target); }));
    }
    return b.finish();
}

std::vector<double> min_d_within(const DistanceMatrix& m, const IndexSet& chosen) {
    std::vector<double> out(chosen.size(), inf);
    for (std::size_t a = 0; a < chosen.size(); ++a) {
        for (std::size_t b = 0; b < chosen.size(); ++b) {
            if (a != b) {
                out[a] = std::min(out[a], m(chosen[a], chosen[b]));
            }
        }
    }
    return out;
}

std::pair<double, Index> mean_min_d(const DistanceMatrix& m, const IndexSet& chosen) {
    if (chosen.size() < 2) {
        throw Error(ErrorCode::BadK, "MeanMinD needs at least two chosen points");
    }
    const auto   values = min_d_within(m, chosen);
    const double mean   = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    Index        best   = chosen.front();
    double       bestv  = inf;
    for (std::size_t a = 0; a < chosen.size(); ++a) {
        const double dev = std::abs(values[a] - mean);
        if (dev < bestv || (dev == bestv && chosen[a] < best)) {
            bestv = dev;
            best  = chosen[a];
        }
    }
    return {mean, best};
}

namespace {

DiversityState targeted_pass(const DistanceMatrix& m, std::size_t k, double target, double slack, Index seed,
                             CompactRule rule) {
    SeedBuilder b(m);
    b.add(seed);
    while (b.size() < k) {
        const Index  best_dev = b.argmin([&](Index i) { return std::abs(b.min_d(i) - target); });
        const double min_dev  = std::abs(b.min_d(best_dev) - target);
        b.add(b.argmin([&](Index i) { return rule == CompactRule::max_d ? b.max_d(i) : b.sum_d(i); },
                       [&](Index i) { return std::abs(b.min_d(i) - target) <= min_dev + slack; }));
    }
    return b.finish();
}

}  // namespace

DiversityState targeted_tiebreak(const DistanceMatrix& m, std::size_t k, const TargetSpec& target_spec,
                                 const DiversityState& prior, CompactRule rule, std::size_t max_passes) {
    check_k(m, k, 2);
    if (prior.chosen.size() != k) {
        throw Error(ErrorCode::BadK, "prior H_o has " + std::to_string(prior.chosen.size()) + " points, expected " +
                                         std::to_string(k));
    }
    if (target_spec.slack < 0.0 || target_spec.slack_fraction < 0.0) {
        throw Error(ErrorCode::ConfigError, "slack must be non-negative");
    }
    auto [target, seed] = mean_min_d(m, prior.chosen);
    auto        state   = targeted_pass(m, k, target, target_spec.effective_slack(target), seed, rule);
    std::size_t passes  = 1;
    while (passes < max_passes) {
        const auto [next_target, next_seed] = mean_min_d(m, state.chosen);
        if (!(next_target > target)) {
            break;
        }
        target = next_target;
        state  = targeted_pass(m, k, target, target_spec.effective_slack(target), next_seed, rule);
        ++passes;
    }
    state.passes = passes;
    return state;
}

DiversityState compact_maxmin(const DistanceMatrix& m, std::size_t k, double slack, Index seed_point,
                              CompactRule rule) {
    check_k(m, k, 2);
    check_seed(m, seed_point);
    if (slack < 0.0) {
        throw Error(ErrorCode::ConfigError, "slack must be non-negative");
    }
    SeedBuilder b(m);
    b.add(seed_point);
    while (b.size() < k) {
        const double max_min = b.min_d(b.argmin([&](Index i) { return -b.min_d(i); }));
        b.add(b.argmin([&](Index i) { return rule == CompactRule::max_d ? b.max_d(i) : b.sum_d(i); },
                       [&](Index i) { return b.min_d(i) >= max_min - slack; }));
    }
    return b.finish();
}

// ---------------------------------------------------------------------------------------------

namespace {

struct EliminationPass {
    IndexSet            chosen;
    std::vector<double> proximity_distances;
    bool                exhausted = false;
};

EliminationPass elimination_pass(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                                 const EliminationOptions& opt, std::optional<Index> first_pick,
                                 std::optional<double>& threshold, std::mt19937_64& rng) {
    const std::size_t n = m.size();
    std::vector<bool> available(n, true);
    std::size_t       n_o = n;
    EliminationPass   pass;

    auto proximity = [&](Index i, std::size_t size) {
        IndexSet out;
        for (const auto j : order.of(i)) {
            if (!available[j]) {
                continue;
            }
            if (threshold) {
                if (m(i, j) > *threshold) {
                    break;
                }
            } else if (out.size() == size) {
                break;
            }
            out.push_back(j);
        }
        return out;
    };

    for (std::size_t step = 0; step < k; ++step) {
        if (n_o == 0) {
            pass.exhausted = true;
            break;
        }
        const std::size_t k_o  = k - step;
        const std::size_t size = (n_o + k_o - 1) / k_o;

        Index pick = no_pick;
        if (step == 0 && first_pick) {
            pick = *first_pick;
        } else if (opt.rule == EliminationRule::random) {
            std::uniform_int_distribution<std::size_t> dist(0, n_o - 1);
            std::size_t                                target = dist(rng);
            for (Index i = 0; i < n; ++i) {
                if (available[i] && target-- == 0) {
                    pick = i;
                    break;
                }
            }
        } else {
            std::vector<std::pair<Index, double>> values;
            for (Index i = 0; i < n; ++i) {
                if (!available[i]) {
                    continue;
                }
                const auto prox = proximity(i, size);
                values.emplace_back(i, prox.empty() ? 0.0 : pseudo_centroid(opt.measure, prox, m).span);
            }
            double mean = 0.0;
            for (const auto& [i, v] : values) {
                mean += v;
            }
            mean /= static_cast<double>(values.size());
            auto key = [&](double v) {
                switch (opt.rule) {
                    case EliminationRule::span_max: return -v;
                    case EliminationRule::span_min: return v;
                    default: return std::abs(v - mean);
                }
            };
            double best = inf;
            for (const auto& [i, v] : values) {
                if (pick == no_pick || key(v) < best) {
                    pick = i;
                    best = key(v);
                }
            }
        }

        const auto prox = proximity(pick, size);
        pass.chosen.push_back(pick);
        available[pick] = false;
        --n_o;
        std::vector<double> step_distances;
        for (const Index j : prox) {
            available[j] = false;
            --n_o;
            step_distances.push_back(m(pick, j));
        }
        pass.proximity_distances.insert(pass.proximity_distances.end(), step_distances.begin(), step_distances.end());
        if (opt.u_mode && !threshold && !step_distances.empty()) {
            threshold = opt.u_rule == ThresholdRule::mean
                            ? std::accumulate(step_distances.begin(), step_distances.end(), 0.0) /
                                  static_cast<double>(step_distances.size())
                            : *std::max_element(step_distances.begin(), step_distances.end());
        }
    }
    if (pass.chosen.size() < k) {
        pass.exhausted = true;
    }
    return pass;
}

}  // namespace

DiversityState successive_elimination(const DistanceMatrix& m, const NeighborOrder& order, std::size_t k,
                                      const EliminationOptions& options) {
    check_k(m, k, 1);
    if (order.size() != m.size()) {
        throw Error(ErrorCode::ConfigError, "neighbor order does not match the matrix");
    }
    std::mt19937_64       rng(options.rng_seed);
    std::optional<double> threshold;
    auto pass = elimination_pass(m, order, k, options, std::nullopt, threshold, rng);

    std::size_t passes = 1;
    if (options.iterate) {
        while (passes < options.max_passes) {
            if (options.u_mode && !pass.proximity_distances.empty()) {
                const auto& d = pass.proximity_distances;
                threshold     = options.u_rule == ThresholdRule::mean
                                    ? std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size())
                                    : *std::max_element(d.begin(), d.end());
            }
            auto next = elimination_pass(m, order, k, options, pass.chosen.back(), threshold, rng);
            ++passes;
            const bool same = next.chosen == pass.chosen;
            pass            = std::move(next);
            if (same) {
                break;
            }
        }
    }

    SeedBuilder b(m);
    for (const Index i : pass.chosen) {
        b.add(i);
    }
    auto st        = b.finish();
    st.passes      = passes;
    st.k_too_large = pass.exhausted;
    return st;
}

std::vector<std::size_t> mind_trace_report(const DiversityState& state, double min_gap, std::optional<double> floor) {
    std::vector<std::size_t> flags;
    const auto&              t = state.mind_trace;
    for (std::size_t a = 0; a < t.size(); ++a) {
        const bool drop  = a > 0 && t[a - 1] - t[a] > min_gap;
        const bool below = floor && t[a] < *floor;
        if (drop || below) {
            flags.push_back(a + 2);
        }
    }
    return flags;
}

}  // namespace pcc

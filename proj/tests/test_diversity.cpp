#include "helpers.hpp"
#include "pcc/diversity.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace pcc;
using pcc::test::m4;

namespace {

void check_partition(const DiversityState& s, std::size_t n) {
    IndexSet all = s.chosen;
    all.insert(all.end(), s.remaining.begin(), s.remaining.end());
    std::sort(all.begin(), all.end());
    CHECK(all == test::iota_set(n));
}

double min_d(const DistanceMatrix& m, const IndexSet& h, Index i) {
    double v = std::numeric_limits<double>::infinity();
    for (Index j : h) v = std::min(v, m(j, i));
    return v;
}

DistanceMatrix equidistant(std::size_t n) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) rows[i][i] = 0.0;
    return DistanceMatrix::build(rows);
}

// Default-mode successive elimination written out from the description.
IndexSet replay_elimination(const DistanceMatrix& m, std::size_t k, EliminationRule rule, MeasureKind kind) {
    std::vector<bool> avail(m.size(), true);
    IndexSet          h;
    std::size_t       n_o = m.size();
    for (std::size_t k_o = k; k_o >= 1 && n_o > 0; --k_o) {
        const std::size_t size = (n_o + k_o - 1) / k_o;
        std::vector<std::pair<Index, IndexSet>> cand;
        for (Index i = 0; i < m.size(); ++i) {
            if (!avail[i]) continue;
            IndexSet others;
            for (Index j = 0; j < m.size(); ++j)
                if (avail[j] && j != i) others.push_back(j);
            std::stable_sort(others.begin(), others.end(), [&](Index a, Index b) { return m(i, a) < m(i, b); });
            others.resize(std::min(size, others.size()));
            cand.emplace_back(i, others);
        }
        std::vector<double> v;
        for (auto& [i, prox] : cand) {
            IndexSet sorted = prox;
            std::sort(sorted.begin(), sorted.end());
            v.push_back(sorted.empty() ? 0.0 : test::naive_centroids(kind == MeasureKind::min_max, m, sorted).first);
        }
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        std::size_t best = 0;
        for (std::size_t p = 1; p < v.size(); ++p) {
            const bool better = rule == EliminationRule::span_max   ? v[p] > v[best]
                                : rule == EliminationRule::span_min ? v[p] < v[best]
                                                                    : std::abs(v[p] - mean) < std::abs(v[best] - mean);
            if (better) best = p;
        }
        h.push_back(cand[best].first);
        avail[cand[best].first] = false;
        --n_o;
        for (Index j : cand[best].second) {
            avail[j] = false;
            --n_o;
        }
        if (k_o == 1) break;
    }
    return h;
}

}  // namespace

TEST_CASE("simple_diversity on M4") {
    auto m = m4();
    auto two = simple_diversity(m, 2, 0);
    CHECK(two.chosen == IndexSet{0, 3});
    auto three = simple_diversity(m, 3, 0);
    CHECK(three.chosen == IndexSet{0, 3, 2});
    CHECK(three.mind_trace == std::vector<double>{7, 3});
    check_partition(three, 4);
    auto one = simple_diversity(m, 1, 2);
    CHECK(one.chosen == IndexSet{2});
    CHECK(one.mind_trace.empty());
    CHECK_THROWS_AS(simple_diversity(m, 5, 0), Error);
    CHECK_THROWS_AS(simple_diversity(m, 0, 0), Error);
}

TEST_CASE("simple_diversity replays the greedy rule and keeps MinD non-increasing") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + trial % 10;
        auto m = test::random_matrix(n, rng, 1, 20);
        const std::size_t k = 1 + trial % n;
        const Index seed = trial % n;
        auto s = simple_diversity(m, k, seed);
        check_partition(s, n);
        IndexSet h{seed};
        for (std::size_t step = 1; step < k; ++step) {
            Index best = n;
            for (Index i = 0; i < n; ++i) {
                if (std::find(h.begin(), h.end(), i) != h.end()) continue;
                if (best == n || min_d(m, h, i) > min_d(m, h, best)) best = i;
            }
            CHECK(s.mind_trace[step - 1] == min_d(m, h, best));
            h.push_back(best);
        }
        CHECK(s.chosen == h);
        for (std::size_t p = 1; p < s.mind_trace.size(); ++p) CHECK(s.mind_trace[p] <= s.mind_trace[p - 1]);
    }
}

TEST_CASE("refined_diversity") {
    auto m = m4();
    auto r = refined_diversity(m, 2, 0);
    CHECK(r.chosen == IndexSet{0, 3});
    CHECK(r.passes == 2);
    CHECK(r.maxmin_history == std::vector<double>{7, 7});
    CHECK_THROWS_AS(refined_diversity(m, 1, 0), Error);

    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 4 + trial % 9;
        auto m2 = test::random_matrix(n, rng);
        const std::size_t k = 2 + trial % (n - 2);
        for (auto pick : {RestartPick::last, RestartPick::middle}) {
            auto s = simple_diversity(m2, k, 0);
            auto ref = refined_diversity(m2, k, 0, pick, 10);
            check_partition(ref, n);
            CHECK(ref.chosen.size() == k);
            CHECK(ref.mind_trace.back() >= s.mind_trace.back());
            CHECK(ref.passes <= 10);
            const auto best = *std::max_element(ref.maxmin_history.begin(), ref.maxmin_history.end());
            CHECK(ref.mind_trace.back() == best);
        }
    }
}

TEST_CASE("compound_diversity") {
    auto m = m4();
    auto c = compound_diversity(m, 3, 2, 0);
    CHECK(c.chosen.size() == 3);
    check_partition(c, 4);
    CHECK_THROWS_AS(compound_diversity(m, 3, 3, 0), Error);
    CHECK_THROWS_AS(compound_diversity(m, 3, 1, 0), Error);

    // Every H_o is optimal: each stage stops after its second pass.
    auto eq = compound_diversity(equidistant(6), 4, 2, 0);
    CHECK(eq.chosen.size() == 4);
    CHECK(eq.passes == 4);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + trial % 8;
        auto m2 = test::random_matrix(n, rng);
        auto s = compound_diversity(m2, 4, 2, trial % n);
        CHECK(s.chosen.size() == 4);
        check_partition(s, n);
    }
}

TEST_CASE("targeted_simple") {
    auto m = m4();
    TargetSpec target_spec;
    target_spec.target = 3;
    auto t = targeted_simple(m, 3, target_spec, 0);
    CHECK(t.chosen == IndexSet{0, 2, 3});

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 4 + trial % 9;
        auto m2 = test::random_matrix(n, rng, 1, 1000000);
        TargetSpec big;
        big.target = 1e12;
        CHECK(targeted_simple(m2, 3, big, 0).chosen == simple_diversity(m2, 3, 0).chosen);
        TargetSpec zero;
        auto z = targeted_simple(m2, 3, zero, 0);
        IndexSet h{0};
        for (int step = 0; step < 2; ++step) {
            Index best = n;
            for (Index i = 0; i < n; ++i) {
                if (std::find(h.begin(), h.end(), i) != h.end()) continue;
                if (best == n || min_d(m2, h, i) < min_d(m2, h, best)) best = i;
            }
            h.push_back(best);
        }
        CHECK(z.chosen == h);
    }
    TargetSpec inf;
    inf.target = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(targeted_simple(m, 2, inf, 0), Error);
}

TEST_CASE("targeted_tiebreak") {
    auto m = m4();
    auto prior = simple_diversity(m, 3, 0);
    auto mo = min_d_within(m, prior.chosen);
    CHECK(mo == std::vector<double>{3, 4, 3});
    auto [mean, seed] = mean_min_d(m, prior.chosen);
    CHECK(mean == doctest::Approx(10.0 / 3.0));
    CHECK(seed == 0);

    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + trial % 8;
        auto m2 = test::random_matrix(n, rng);
        const std::size_t k = 2 + trial % 3;
        auto pr = simple_diversity(m2, k, 0);
        TargetSpec target_spec;
        target_spec.slack_fraction = trial % 2 ? 0.1 : 0.0;
        auto out = targeted_tiebreak(m2, k, target_spec, pr, CompactRule::max_d, 1);
        CHECK(out.chosen.size() == k);
        check_partition(out, n);
        // Replay: every pick lies in the slack band and is the most compact member of it.
        const auto [t, first] = mean_min_d(m2, pr.chosen);
        CHECK(out.chosen.front() == first);
        const double slack = target_spec.effective_slack(t);
        IndexSet h{first};
        for (std::size_t step = 1; step < k; ++step) {
            double min_dev = std::numeric_limits<double>::infinity();
            for (Index i = 0; i < n; ++i)
                if (std::find(h.begin(), h.end(), i) == h.end()) min_dev = std::min(min_dev, std::abs(min_d(m2, h, i) - t));
            const Index pick = out.chosen[step];
            CHECK(std::abs(min_d(m2, h, pick) - t) <= min_dev + slack);
            double pick_max = 0.0;
            for (Index j : h) pick_max = std::max(pick_max, m2(j, pick));
            for (Index i = 0; i < n; ++i) {
                if (std::find(h.begin(), h.end(), i) != h.end()) continue;
                if (std::abs(min_d(m2, h, i) - t) > min_dev + slack) continue;
                double mx = 0.0;
                for (Index j : h) mx = std::max(mx, m2(j, i));
                CHECK(pick_max <= mx);
            }
            h.push_back(pick);
        }
    }
}

TEST_CASE("compact_maxmin") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 4 + trial % 9;
        auto m = test::random_matrix(n, rng, 1, 1000000);
        CHECK(compact_maxmin(m, 3, 0.0, 0).chosen == simple_diversity(m, 3, 0).chosen);

        auto mm = test::random_matrix(n, rng);
        const double slack = 10.0;
        auto s = compact_maxmin(mm, 3, slack, 0, trial % 2 ? CompactRule::sum_d : CompactRule::max_d);
        IndexSet h{0};
        for (std::size_t step = 1; step < 3; ++step) {
            double maxmin = 0.0;
            for (Index i = 0; i < n; ++i)
                if (std::find(h.begin(), h.end(), i) == h.end()) maxmin = std::max(maxmin, min_d(mm, h, i));
            CHECK(min_d(mm, h, s.chosen[step]) >= maxmin - slack);
            h.push_back(s.chosen[step]);
        }
    }
    CHECK(compact_maxmin(equidistant(5), 3, 0.5, 0).chosen == IndexSet{0, 1, 2});
    CHECK_THROWS_AS(compact_maxmin(m4(), 2, -1.0, 0), Error);
}

TEST_CASE("successive_elimination") {
    auto m = m4();
    auto o = neighbor_order(m);
    EliminationOptions opts;
    opts.measure.kind = MeasureKind::min_max;
    auto one = successive_elimination(m, o, 1, opts);
    CHECK(one.chosen.size() == 1);
    CHECK(one.remaining.size() == 3);

    // V: 0 -> {1,2} span 2, 1 -> {0,2} span 3, 2 -> {0,1} span 1, 3 -> {1,2} span 2.
    auto two = successive_elimination(m, o, 2, opts);
    CHECK(two.chosen == IndexSet{1, 3});
    CHECK(two.chosen == replay_elimination(m, 2, EliminationRule::span_max, MeasureKind::min_max));

    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 3 + trial % 10;
        auto m2 = test::random_matrix(n, rng);
        auto o2 = neighbor_order(m2);
        const std::size_t k = 1 + trial % 3;
        for (auto rule : {EliminationRule::span_max, EliminationRule::span_min, EliminationRule::span_mean}) {
            for (auto kind : {MeasureKind::min_max, MeasureKind::min_sum}) {
                EliminationOptions e;
                e.rule         = rule;
                e.measure.kind = kind;
                auto s = successive_elimination(m2, o2, k, e);
                CHECK(s.chosen == replay_elimination(m2, k, rule, kind));
                check_partition(s, n);
            }
        }
        EliminationOptions rnd;
        rnd.rule     = EliminationRule::random;
        rnd.rng_seed = 77;
        CHECK(successive_elimination(m2, o2, k, rnd).chosen == successive_elimination(m2, o2, k, rnd).chosen);

        EliminationOptions it;
        it.iterate = true;
        CHECK(successive_elimination(m2, o2, k, it).chosen.size() <= k);

        EliminationOptions u;
        u.u_mode = true;
        u.u_rule = trial % 2 ? ThresholdRule::max : ThresholdRule::mean;
        auto us = successive_elimination(m2, o2, std::min<std::size_t>(n, 4), u);
        check_partition(us, n);
        CHECK((us.chosen.size() == std::min<std::size_t>(n, 4) || us.k_too_large));
    }
}

TEST_CASE("mind_trace_report") {
    DiversityState flat;
    flat.mind_trace = {5, 5, 5};
    CHECK(mind_trace_report(flat, 0.5).empty());
    DiversityState drop;
    drop.mind_trace = {7, 3};
    CHECK(mind_trace_report(drop, 3.0) == std::vector<std::size_t>{3});
    CHECK(simple_diversity(m4(), 3, 0).mind_trace == std::vector<double>{7, 3});
    CHECK(mind_trace_report(flat, 100.0, 6.0) == std::vector<std::size_t>{2, 3, 4});
}

#include "helpers.hpp"
#include "pcc/regret.hpp"

#include <doctest.h>

#include <limits>

using namespace pcc;
using pcc::test::m4;

namespace {

EngineConfig cfg_of(MeasureKind kind) {
    EngineConfig c;
    c.measure.kind = kind;
    return c;
}

Clustering m4_split() {
    return make_clustering({Cluster{{0, 1}, 0, {0}, 1}, Cluster{{2, 3}, 2, {2}, 4}}, 4);
}

// Step-1 clustering from a random partition.
Clustering random_step1(const DistanceMatrix& m, std::size_t k, const EngineConfig& cfg, std::mt19937_64& rng) {
    std::vector<Cluster> cl;
    for (auto& b : test::random_partition(m.size(), k, rng)) cl.push_back(Cluster{b, b.front(), {b.front()}, 0});
    return recompute_centroids(make_clustering(cl, m.size()), cfg, m);
}

// Nearest foreign centroid distance, d(centroid, j).
double foreign_d2(const Clustering& c, const DistanceMatrix& m, Index j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < c.size(); ++h)
        if (h != c.assignment[j]) best = std::min(best, m(c.clusters[h].centroid, j));
    return best;
}

}  // namespace

TEST_CASE("regret_step basics") {
    auto m = m4();
    auto cfg = cfg_of(MeasureKind::min_max);
    // {0,1,2},{3} with centroids 1 and 3 is a fixed point.
    auto fixed = recompute_centroids(assign_points(IndexSet{1, 3}, m, false), cfg, m);
    auto [same, sel] = regret_step(fixed, cfg, m, 0.5);
    CHECK(sel == 0);
    CHECK(test::member_lists(same) == test::member_lists(fixed));
    CHECK(regret_candidates(fixed, cfg, m).empty());

    CHECK_THROWS_AS(regret_step(fixed, cfg, m, 0.0), Error);
    CHECK_THROWS_AS(regret_step(fixed, cfg, m, 1.5), Error);

    CHECK(FSchedule{0.2, 0.05, 10}.at(0) == 0.2);
    CHECK(FSchedule{0.2, 0.05, 10}.at(10) == 0.05);
    CHECK(FSchedule{0.2, 0.05, 10}.at(50) == 0.05);
    CHECK(FSchedule{0.2, 0.05, 10}.at(5) == doctest::Approx(0.125));
    CHECK_THROWS_AS((FSchedule{0.0, 0.5, 3}.validate()), Error);
}

TEST_CASE("regret_step with F = 1 is Step 2; smaller F keeps the largest regrets") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + trial % 9;
        const std::size_t k = 2 + trial % 3;
        auto m = test::random_matrix(n, rng, 1, 30);
        auto cfg = cfg_of(trial % 2 ? MeasureKind::min_sum : MeasureKind::min_max);
        auto s1 = random_step1(m, k, cfg, rng);

        auto [full, moved] = regret_step(s1, cfg, m, 1.0);
        auto plain = detail::step2(s1, cfg, m);
        CHECK(test::member_lists(full) == test::member_lists(plain));

        auto cands = regret_candidates(s1, cfg, m);
        for (const auto& e : cands) {
            CHECK(e.regret == e.a_dist - e.r_dist);
            CHECK(e.r_dist <= e.a_dist);
            CHECK(m(e.assign, e.point) == e.a_dist);
            CHECK(m(e.reassign, e.point) == e.r_dist);
        }
        const double f = 0.2;
        const std::size_t cap = trial % 3 == 0 ? 1 : unlimited;
        auto [part, selected] = regret_step(s1, cfg, m, f, cap);
        part.validate(n);
        if (cands.empty()) {
            CHECK(selected == 0);
            continue;
        }
        std::vector<double> regrets;
        for (const auto& e : cands) regrets.push_back(e.regret);
        std::sort(regrets.rbegin(), regrets.rend());
        const std::size_t r = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(f * regrets.size() - 1e-12)));
        const double t = regrets[r - 1];
        const auto at_least = static_cast<std::size_t>(std::count_if(regrets.begin(), regrets.end(), [&](double x) { return x >= t; }));
        CHECK(selected == std::min(cap, at_least));
        // Moved points have the largest regrets.
        double min_moved = std::numeric_limits<double>::infinity(), max_kept = -1.0;
        for (const auto& e : cands) {
            const bool moved_now = part.assignment[e.point] != s1.assignment[e.point];
            if (moved_now) {
                min_moved = std::min(min_moved, e.regret);
                CHECK(e.regret >= t);
            } else {
                max_kept = std::max(max_kept, e.regret);
            }
        }
        if (selected > 0 && max_kept >= 0) CHECK(min_moved >= max_kept);
    }
}

TEST_CASE("run_regret_threshold") {
    std::mt19937_64 rng(81);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + trial % 8;
        const std::size_t k = 2 + trial % 3;
        auto m = test::random_matrix(n, rng);
        auto cfg = cfg_of(trial % 2 ? MeasureKind::min_sum : MeasureKind::min_max);
        cfg.record_trajectory = true;
        IndexSet perm = test::iota_set(n);
        std::shuffle(perm.begin(), perm.end(), rng);
        IndexSet start(perm.begin(), perm.begin() + k);

        auto a = run_kpc(start, cfg, m);
        auto b = run_regret_threshold(start, cfg, m, FSchedule::constant(1.0));
        REQUIRE(a.trajectory.size() == b.trajectory.size());
        for (std::size_t t = 0; t < a.trajectory.size(); ++t)
            CHECK(test::member_lists(a.trajectory[t]) == test::member_lists(b.trajectory[t]));
        CHECK(a.objective_trace == b.objective_trace);

        auto d = run_regret_threshold(start, cfg, m, FSchedule{0.2, 0.05, 10});
        CHECK(d.iterations <= cfg.max_iterations);
        CHECK(d.selected_counts.size() == d.iterations);
        for (const auto& c : d.trajectory) c.validate(n);
    }
    auto m = m4();
    auto all = run_regret_threshold(IndexSet{0, 1, 2, 3}, cfg_of(MeasureKind::min_max), m, FSchedule{0.2, 0.05, 10});
    CHECK(all.terminated_by == StopReason::fixed_point);
    CHECK(all.iterations == 1);
}

TEST_CASE("quality on M4") {
    auto m = m4();
    auto q = quality(m4_split(), m);
    CHECK(q.d_o[1] == 1);
    CHECK(q.d_o[3] == 3);
    CHECK(q.d_o[0] == 0);
    CHECK(q.d_o[2] == 0);
    CHECK(q.cluster_mean == std::vector<double>{0.5, 1.5});
    CHECK(q.value == 2.0);

    QualityOptions nc;
    nc.denominator = Denominator::non_centroid_size;
    CHECK(quality(m4_split(), m, nc).value == 4.0);
    QualityOptions sq;
    sq.accent = Accent::squared_mean;
    CHECK(quality(m4_split(), m, sq).value == 0.5 + 4.5);
    QualityOptions inc;
    inc.convention = CentroidConvention::include;
    auto qi = quality(m4_split(), m, inc);
    CHECK(qi.d1[0] == 0);
    CHECK(qi.d_o[0] == m(2, 0));

    auto singles = recompute_centroids(assign_points(IndexSet{0, 1, 2, 3}, m, false), cfg_of(MeasureKind::min_max), m);
    CHECK(quality(singles, m).value == 0);

    auto whole = recompute_centroids(assign_points(IndexSet{0}, m, false), cfg_of(MeasureKind::min_max), m);
    try {
        quality(whole, m);
        FAIL("expected SingleCluster");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingleCluster);
    }

    // Equidistant: d_2 = d_1 for every point.
    std::vector<std::vector<double>> rows(5, std::vector<double>(5, 2.0));
    for (int i = 0; i < 5; ++i) rows[i][i] = 0;
    auto eq = DistanceMatrix::build(rows);
    auto ec = recompute_centroids(assign_points(IndexSet{0, 1}, eq, false), cfg_of(MeasureKind::min_max), eq);
    for (double v : quality(ec, eq).d_o) CHECK(v == 0);
}

TEST_CASE("quality properties") {
    std::mt19937_64 rng(91);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 4 + trial % 9;
        const std::size_t k = 2 + trial % 3;
        auto m = test::random_matrix(n, rng);
        IndexSet perm = test::iota_set(n);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (bool multi : {false, true}) {
            auto cfg = cfg_of(MeasureKind::min_max);
            cfg.multi_centroid = multi;
            auto run = run_kpc(IndexSet(perm.begin(), perm.begin() + k), cfg, m);
            if (run.terminated_by != StopReason::fixed_point || run.final.size() < 2) continue;
            for (auto conv : {CentroidConvention::exclude, CentroidConvention::include}) {
                QualityOptions o;
                o.convention        = conv;
                o.use_all_centroids = multi;
                auto q = quality(run.final, m, o);
                for (double v : q.d_o) CHECK(v >= 0);
                auto cl = run.final.clusters;
                std::shuffle(cl.begin(), cl.end(), rng);
                CHECK(quality(make_clustering(cl, n), m, o).value == doctest::Approx(q.value).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("diversified_restart") {
    auto m = m4();
    auto cfg = cfg_of(MeasureKind::min_max);
    auto r = diversified_restart(m4_split(), cfg, m);
    CHECK(test::member_lists(r) == std::vector<IndexSet>{{0, 3}, {1, 2}});
    auto none = diversified_restart(m4_split(), cfg, m, RestartMode::second, 0.0);
    CHECK(test::member_lists(none) == test::member_lists(m4_split()));

    auto whole = recompute_centroids(assign_points(IndexSet{0}, m, false), cfg, m);
    CHECK_THROWS_AS(diversified_restart(whole, cfg, m), Error);
    CHECK_THROWS_AS(diversified_restart(m4_split(), cfg, m, RestartMode::second, 1.5), Error);

    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 4 + trial % 9;
        const std::size_t k = 2 + trial % 3;
        auto m2 = test::random_matrix(n, rng);
        auto c = random_step1(m2, k, cfg, rng);
        auto moved = diversified_restart(c, cfg, m2, RestartMode::second);
        moved.validate(n);
        auto after = quality(moved, m2);
        for (Index j = 0; j < n; ++j) {
            const auto& old_cl = c.clusters[c.assignment[j]];
            if (old_cl.centroid == j) continue;
            const auto& new_cl = moved.clusters[moved.assignment[j]];
            CHECK(m2(new_cl.centroid, j) == foreign_d2(c, m2, j));
            CHECK(after.d1[j] == foreign_d2(c, m2, j));
        }
        for (auto mode : {RestartMode::third, RestartMode::farthest}) diversified_restart(c, cfg, m2, mode).validate(n);
        auto half = diversified_restart(c, cfg, m2, RestartMode::second, 0.5);
        half.validate(n);
    }
}

TEST_CASE("stochastic_restart") {
    auto cfg = cfg_of(MeasureKind::min_max);
    auto m = m4();
    // d_o = 1 and 3, both positive: nothing may move with cutoff 0.
    auto kept = stochastic_restart(m4_split(), cfg, m, 0.0, 5);
    CHECK(test::member_lists(kept) == test::member_lists(m4_split()));

    std::vector<std::vector<double>> rows(6, std::vector<double>(6, 2.0));
    for (int i = 0; i < 6; ++i) rows[i][i] = 0;
    auto eq = DistanceMatrix::build(rows);
    auto c = make_clustering({Cluster{{0, 2, 3}, 0, {0}, 2}, Cluster{{1, 4, 5}, 1, {1}, 2}}, 6);
    auto all = stochastic_restart(c, cfg, eq, std::numeric_limits<double>::infinity(), 5);
    CHECK(test::member_lists(all) == std::vector<IndexSet>{{0, 4, 5}, {1, 2, 3}});

    std::mt19937_64 rng(111);
    for (int trial = 0; trial < 30; ++trial) {
        auto m2 = test::random_matrix(10, rng);
        auto c2 = random_step1(m2, 3, cfg, rng);
        auto a = stochastic_restart(c2, cfg, m2, 50.0, 1234);
        auto b = stochastic_restart(c2, cfg, m2, 50.0, 1234);
        CHECK(test::member_lists(a) == test::member_lists(b));
        a.validate(10);
    }
}

#include "helpers.hpp"
#include "pcc/exact_weight.hpp"

#include <doctest.h>

using namespace pcc;
using pcc::test::m4;

TEST_CASE("build_matrix validates shape and diagonal") {
    auto one = DistanceMatrix::build({{0}});
    CHECK(one.size() == 1);
    CHECK(one.is_symmetric());

    auto two = DistanceMatrix::build({{0, 1}, {1, 0}});
    CHECK(two.size() == 2);
    CHECK(two.is_symmetric());

    auto asym = DistanceMatrix::build({{0, 1}, {2, 0}}, 0.0);
    CHECK_FALSE(asym.is_symmetric());

    auto code_of = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::ConfigError;
    };
    CHECK(code_of([] { DistanceMatrix::build({{0, 1}, {1, 0, 2}}); }) == ErrorCode::NonSquare);
    CHECK(code_of([] { DistanceMatrix::build({{1, 1}, {1, 0}}); }) == ErrorCode::NonZeroDiagonal);
    CHECK(code_of([] { DistanceMatrix::build({{0, NAN}, {1, 0}}); }) == ErrorCode::NonFiniteEntry);
    CHECK(code_of([] { DistanceMatrix::build({}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("sym_tol is an absolute bound on the asymmetry") {
    CHECK(DistanceMatrix::build({{0, 1}, {1.5, 0}}, 0.5).is_symmetric());
    CHECK_FALSE(DistanceMatrix::build({{0, 1}, {1.5, 0}}, 0.49).is_symmetric());
    CHECK(DistanceMatrix::build({{0, -2}, {-2, 0}}).is_symmetric());
}

TEST_CASE("from_points") {
    auto a = from_points({{0}, {3}}, Metric::euclidean);
    CHECK(a(0, 1) == 3);
    CHECK(a(1, 0) == 3);
    CHECK(from_points({{0, 0}, {3, 4}}, Metric::euclidean)(0, 1) == 5);
    CHECK(from_points({{0, 0}, {3, 4}}, Metric::manhattan)(0, 1) == 7);
    CHECK(from_points({{0, 0}, {3, 4}}, Metric::squared_euclidean)(0, 1) == 25);

    auto m = from_points({{0}, {1}, {3}, {7}}, Metric::euclidean);
    auto ref = m4();
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) CHECK(m(i, j) == ref(i, j));

    CHECK_THROWS_AS(from_points({{0, 1}, {1}}, Metric::euclidean), Error);
    CHECK_THROWS_AS(from_points({}, Metric::euclidean), Error);
}

TEST_CASE("apply_weight") {
    auto m = m4();
    auto same = apply_weight(m, 0.0);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) CHECK(same(i, j) == m(i, j));
    CHECK(apply_weight(m, 1.0)(0, 2) == 9);
    auto w = apply_weight(DistanceMatrix::build({{0, 2}, {2, 0}}), 2.0);
    CHECK(w(0, 1) == 8);
    CHECK(w(0, 0) == 0);
    try {
        apply_weight(DistanceMatrix::build({{0, -1}, {-1, 0}}), 1.0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NegativeEntryWithWeighting);
    }
}

TEST_CASE("separate on M4") {
    auto m = m4();
    IndexSet all{0, 1, 2, 3};
    CHECK(separate({MeasureKind::min_max}, 2, all, m) == 4);
    CHECK(separate({MeasureKind::min_sum}, 1, all, m) == 9);
    IndexSet single{2};
    CHECK(separate({MeasureKind::min_max}, 2, single, m) == 0);
    CHECK(separate({MeasureKind::min_sum}, 2, single, m) == 0);
    IndexSet other{0, 1};
    CHECK_THROWS_AS(separate({MeasureKind::min_max}, 3, other, m), Error);
}

TEST_CASE("pseudo_centroid on M4") {
    auto m = m4();
    IndexSet all{0, 1, 2, 3};
    auto mm = pseudo_centroid({MeasureKind::min_max}, all, m);
    CHECK(mm.centroid == 2);
    CHECK(mm.span == 4);
    CHECK(mm.all_centroids == IndexSet{2});

    auto ms = pseudo_centroid({MeasureKind::min_sum}, all, m);
    CHECK(ms.centroid == 1);
    CHECK(ms.span == 9);
    CHECK(ms.all_centroids == IndexSet{1, 2});

    std::mt19937_64 rng(3);
    auto big = test::random_matrix(8, rng);
    IndexSet five{5};
    auto s = pseudo_centroid({MeasureKind::min_max}, five, big);
    CHECK(s.centroid == 5);
    CHECK(s.span == 0);
    CHECK(s.all_centroids == IndexSet{5});

    IndexSet none;
    CHECK_THROWS_AS(pseudo_centroid({MeasureKind::min_max}, none, m), Error);
}

TEST_CASE("neighbor_order") {
    auto m = m4();
    auto o = neighbor_order(m);
    CHECK(std::vector<std::uint32_t>(o.of(0).begin(), o.of(0).end()) == std::vector<std::uint32_t>{1, 2, 3});
    CHECK(std::vector<std::uint32_t>(o.of(2).begin(), o.of(2).end()) == std::vector<std::uint32_t>{1, 0, 3});
    auto tie = neighbor_order(DistanceMatrix::build({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));
    CHECK(std::vector<std::uint32_t>(tie.of(0).begin(), tie.of(0).end()) == std::vector<std::uint32_t>{1, 2});
    CHECK_THROWS_AS(neighbor_order(DistanceMatrix::build({{0}})), Error);
}

TEST_CASE("neighbor_order agrees with a stable sort, float and integer paths") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 15;
        // Narrow integer range exercises the bucket path, the wide one the comparison sort.
        auto m = trial % 2 ? test::random_matrix(n, rng, 0, 5) : test::random_matrix(n, rng, 1, 1000000);
        auto o = neighbor_order(m);
        for (Index i = 0; i < n; ++i) {
            IndexSet expect;
            for (Index j = 0; j < n; ++j)
                if (j != i) expect.push_back(j);
            std::stable_sort(expect.begin(), expect.end(), [&](Index a, Index b) { return m(i, a) < m(i, b); });
            CHECK(IndexSet(o.of(i).begin(), o.of(i).end()) == expect);
        }
    }
}

TEST_CASE("properties: minimality, pair spans, weighting keeps row order") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + trial % 7;
        auto m = test::random_matrix(n, rng);
        // Every subset of N, compared with the naive oracle.
        for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
            IndexSet c;
            for (Index i = 0; i < n; ++i)
                if (mask & (1u << i)) c.push_back(i);
            for (bool minmax : {true, false}) {
                SeparationMeasure meas{minmax ? MeasureKind::min_max : MeasureKind::min_sum};
                auto r = pseudo_centroid(meas, c, m);
                auto [span, all] = test::naive_centroids(minmax, m, c);
                CHECK(r.span == span);
                CHECK(r.all_centroids == all);
                CHECK(r.centroid == all.front());
                for (Index i : c) CHECK(r.span <= separate(meas, i, c, m));
            }
            if (c.size() == 2) {
                auto r = pseudo_centroid({MeasureKind::min_max}, c, m);
                CHECK(r.span == m(c[0], c[1]));
                CHECK(r.all_centroids == c);
            }
        }
        auto w = apply_weight(m, 1.5);
        auto a = neighbor_order(m);
        auto b = neighbor_order(w);
        for (Index i = 0; i < n; ++i) {
            bool distinct = true;
            for (Index x = 0; x < n; ++x)
                for (Index y = x + 1; y < n; ++y)
                    if (x != i && y != i && m(i, x) == m(i, y)) distinct = false;
            if (distinct) CHECK(IndexSet(a.of(i).begin(), a.of(i).end()) == IndexSet(b.of(i).begin(), b.of(i).end()));
        }
    }
}

TEST_CASE("asymmetric matrices read d(first, second)") {
    auto m = DistanceMatrix::build({{0, 1, 10}, {5, 0, 1}, {1, 5, 0}});
    IndexSet all{0, 1, 2};
    CHECK(separate({MeasureKind::min_max}, 0, all, m) == 10);
    CHECK(separate({MeasureKind::min_max}, 1, all, m) == 5);
    CHECK(separate({MeasureKind::min_sum}, 2, all, m) == 6);
}

TEST_CASE("exact weighting: big integers and the stable centroid") {
    auto m = m4();
    IndexSet all{0, 1, 2, 3};
    CHECK(exact_weighted_minsum_centroids(m, all, 1) == IndexSet{1, 2});
    // Large powers would overflow a double; the exact path still ranks them.
    CHECK(exact_weighted_minsum_centroids(m, all, 400) == IndexSet{2});
    auto s = stable_weighted_centroids(m, all);
    CHECK(s.centroids == IndexSet{2});
    CHECK_THROWS_AS(exact_weighted_minsum_centroids(DistanceMatrix::build({{0, 0.5}, {0.5, 0}}), IndexSet{0, 1}, 2),
                    Error);
}

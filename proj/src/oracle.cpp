#include "pcc/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace pcc::oracle {

DistanceMatrix random_symmetric_integer(std::size_t n, int lo, int hi, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dist(lo, hi);
    std::vector<double>                flat(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            flat[i * n + j] = flat[j * n + i] = dist(rng);
        }
    }
    return DistanceMatrix::from_flat(n, std::move(flat));
}

namespace {

struct Neighbor {
    double d;
    Index  j;
};

std::vector<Neighbor> sorted_neighbors(const DistanceMatrix& m, Index i, const IndexSet& pool) {
    std::vector<Neighbor> out;
    for (const Index j : pool) {
        if (j != i) {
            out.push_back({m(i, j), j});
        }
    }
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.d != b.d ? a.d < b.d : a.j < b.j;
    });
    return out;
}

}  // namespace

std::vector<ReferenceStep> reference_adaptive(const DistanceMatrix& m, std::size_t k, MeasureKind kind,
                                              const AdaptiveOptions& options) {
    const double inf = std::numeric_limits<double>::infinity();
    IndexSet     pool(m.size());
    std::iota(pool.begin(), pool.end(), Index{0});
    std::vector<ReferenceStep> steps;

    for (std::size_t k_o = k; k_o >= 1 && !pool.empty(); --k_o) {
        ReferenceStep step;
        step.k_o = k_o;
        if (pool.size() == 1) {
            step.members  = pool;
            step.centroid = pool.front();
            steps.push_back(step);
            pool.clear();
            continue;
        }
        const auto [min_size, max_size] = adaptive_size_bounds(pool.size(), k_o, options);
        const std::size_t lo            = min_size - 1;
        const std::size_t hi            = max_size - 1;

        std::vector<std::vector<Neighbor>> lists;
        for (const Index i : pool) {
            lists.push_back(sorted_neighbors(m, i, pool));
        }

        // Phase 1 on the first `lo` neighbors of every anchor.
        double best_d = inf, best_s = inf, best_min_gap = 0.0, best_sum_gap = 0.0;
        bool   have   = false;
        for (std::size_t a = 0; a < pool.size(); ++a) {
            const auto& l     = lists[a];
            double      d     = lo == 0 ? 0.0 : l[lo - 1].d;
            double      s     = 0.0;
            double      min_g = inf;
            double      sum_g = 0.0;
            for (std::size_t t = 0; t < lo; ++t) {
                s += l[t].d;
                if (t > 0) {
                    min_g = std::min(min_g, l[t].d - l[t - 1].d);
                    sum_g += l[t].d - l[t - 1].d;
                }
            }
            bool better;
            if (kind == MeasureKind::min_max) {
                better = !have || d < best_d || (d == best_d && min_g > best_min_gap);
            } else {
                better = !have || s < best_s || (s == best_s && (d < best_d || (d == best_d && min_g > best_min_gap)));
            }
            if (better) {
                have = true;
                best_d = d, best_s = s, best_min_gap = min_g, best_sum_gap = sum_g;
            }
        }
        const double gap = lo >= 2 ? options.lambda * best_sum_gap / static_cast<double>(lo - 1) +
                                         (1.0 - options.lambda) * best_min_gap
                                   : 0.0;
        const double distance_limit = best_d + gap;
        const double first_sum      = best_s + gap;

        // Phase 2: admissible size per anchor, then (size desc, value asc, index asc).
        long   pick_size = -1;
        double pick_val  = inf;
        Index  pick      = npos;
        for (std::size_t a = 0; a < pool.size(); ++a) {
            const auto& l = lists[a];
            std::size_t t = 0;
            double      v = 0.0;
            if (kind == MeasureKind::min_max) {
                while (t < hi && t < l.size() && l[t].d <= distance_limit) {
                    ++t;
                }
                v = t == 0 ? 0.0 : l[t - 1].d;
                if (lo > 0 && t < lo) {
                    continue;
                }
            } else {
                double s = 0.0;
                for (std::size_t u = 0; u < lo; ++u) {
                    s += l[u].d;
                }
                double limit = first_sum;
                if (s > limit) {
                    continue;
                }
                t = lo;
                while (t < hi && t < l.size()) {
                    const double s2 = s + l[t].d;
                    const double l2 = limit + distance_limit;
                    if (s2 > l2) {
                        break;
                    }
                    s = s2, limit = l2;
                    ++t;
                }
                v = s;
            }
            const auto ts = static_cast<long>(t);
            if (ts > pick_size || (ts == pick_size && v < pick_val)) {
                pick_size = ts, pick_val = v, pick = pool[a];
            }
        }
        const auto& l = lists[static_cast<std::size_t>(std::find(pool.begin(), pool.end(), pick) - pool.begin())];
        step.centroid = pick;
        step.value    = pick_val;
        step.members  = {pick};
        for (long t = 0; t < pick_size; ++t) {
            step.members.push_back(l[static_cast<std::size_t>(t)].j);
        }
        std::sort(step.members.begin(), step.members.end());
        IndexSet rest;
        std::set_difference(pool.begin(), pool.end(), step.members.begin(), step.members.end(),
                            std::back_inserter(rest));
        pool = std::move(rest);
        steps.push_back(std::move(step));
    }
    return steps;
}

namespace {

double binomial(std::size_t n, std::size_t v) {
    double r = 1.0;
    for (std::size_t t = 1; t <= v; ++t) {
        r = r * static_cast<double>(n - v + t) / static_cast<double>(t);
    }
    return r;
}

void check_options(const SuiteOptions& o) {
    if (o.n_min < 2 || o.n_min > o.n_max || o.k_min < 1 || o.k_min > o.k_max || o.entry_min > o.entry_max) {
        throw Error(ErrorCode::ConfigError, "inconsistent oracle suite bounds");
    }
}

std::size_t draw(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

void note_failure(SuiteResult& r, const std::string& what) {
    if (r.failures.size() < 10) {
        r.failures.push_back(what);
    }
}

}  // namespace

std::size_t max_oracle_n() {
    std::size_t n = 2;
    while (binomial(n + 1, (n + 1) / 2) <= max_brute_force_subsets) {
        ++n;
    }
    return n;
}

SuiteResult primary_suite(const SuiteOptions& options) {
    check_options(options);
    if (options.n_max > max_oracle_n()) {
        throw Error(ErrorCode::CombinatorialBlowup, "n_max = " + std::to_string(options.n_max) +
                                                        " exceeds the brute-force limit of " +
                                                        std::to_string(max_oracle_n()));
    }
    SuiteResult r;
    r.name   = "primary_start";
    r.trials = options.trials;
    std::mt19937_64 rng(options.seed);
    for (std::size_t t = 0; t < options.trials; ++t) {
        const std::size_t n     = draw(rng, options.n_min, options.n_max);
        const std::size_t k     = std::min(n, draw(rng, options.k_min, options.k_max));
        const auto        m     = random_symmetric_integer(n, options.entry_min, options.entry_max, rng);
        const auto        order = neighbor_order(m);
        bool              ok    = true;
        for (const MeasureKind kind : {MeasureKind::min_max, MeasureKind::min_sum}) {
            const auto state = kind == MeasureKind::min_max ? primary_minmax(m, order, k) : primary_minsum(m, order, k);
            IndexSet   pool(n);
            std::iota(pool.begin(), pool.end(), Index{0});
            for (const auto& c : state.clusters) {
                const std::size_t expected = (pool.size() + c.k_o - 1) / c.k_o;
                const auto        best = brute_force_best_cluster(m, pool, c.members.size(), SeparationMeasure{kind, 0.0});
                if (c.members.size() != expected || best.span != c.span) {
                    ok = false;
                    std::ostringstream os;
                    os << "trial " << t << (kind == MeasureKind::min_max ? " minmax" : " minsum") << " k_o=" << c.k_o
                       << " size " << c.members.size() << "/" << expected << " span " << c.span << " vs "
                       << best.span;
                    note_failure(r, os.str());
                }
                IndexSet rest;
                std::set_difference(pool.begin(), pool.end(), c.members.begin(), c.members.end(),
                                    std::back_inserter(rest));
                pool = std::move(rest);
            }
        }
        r.passed += ok ? 1 : 0;
    }
    return r;
}

SuiteResult adaptive_suite(const SuiteOptions& options, const std::vector<double>& lambdas) {
    check_options(options);
    if (lambdas.empty()) {
        throw Error(ErrorCode::ConfigError, "no lambda values given");
    }
    SuiteResult r;
    r.name   = "adaptive_start";
    r.trials = options.trials;
    std::mt19937_64 rng(options.seed);
    for (std::size_t t = 0; t < options.trials; ++t) {
        const std::size_t n     = draw(rng, options.n_min, options.n_max);
        const std::size_t k     = std::min(n, draw(rng, options.k_min, options.k_max));
        const auto        m     = random_symmetric_integer(n, options.entry_min, options.entry_max, rng);
        const auto        order = neighbor_order(m);
        AdaptiveOptions   ao;
        ao.lambda = lambdas[t % lambdas.size()];
        bool ok   = true;
        for (const MeasureKind kind : {MeasureKind::min_max, MeasureKind::min_sum}) {
            const auto got = kind == MeasureKind::min_max ? adaptive_minmax(m, order, k, ao)
                                                          : adaptive_minsum(m, order, k, ao);
            const auto want = reference_adaptive(m, k, kind, ao);
            bool       same = got.clusters.size() == want.size();
            for (std::size_t s = 0; same && s < want.size(); ++s) {
                const auto& g = got.clusters[s];
                const auto& w = want[s];
                same = g.members == w.members && g.centroid == w.centroid && g.span == w.value;
            }
            if (!same) {
                ok = false;
                std::ostringstream os;
                os << "trial " << t << (kind == MeasureKind::min_max ? " minmax" : " minsum") << " n=" << n
                   << " k=" << k << " lambda=" << ao.lambda;
                note_failure(r, os.str());
            }
        }
        r.passed += ok ? 1 : 0;
    }
    return r;
}

}  // namespace pcc::oracle

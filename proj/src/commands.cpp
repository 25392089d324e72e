#include "pcc/commands.hpp"

#include "pcc/diversity.hpp"
#include "pcc/engine.hpp"
#include "pcc/intensity.hpp"
#include "pcc/regret.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace pcc {

using nlohmann::json;

namespace {

void one_of(const std::string& field, const std::string& value, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed) {
        if (value == a) {
            return;
        }
    }
    std::string list;
    for (const char* a : allowed) {
        list += list.empty() ? a : std::string(", ") + a;
    }
    throw Error(ErrorCode::ConfigError, field + " = '" + value + "' (expected one of " + list + ")");
}

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw Error(ErrorCode::ConfigError, what);
    }
}

}  // namespace

void RunConfig::validate() const {
    one_of("format", format, {"auto", "dense", "points", "lower"});
    one_of("metric", metric, {"euclidean", "squared_euclidean", "manhattan"});
    one_of("header", header, {"auto", "yes", "no"});
    one_of("algorithm", algorithm, {"kminmax", "kminsum"});
    one_of("start", start, {"simple", "refined", "compound", "targeted", "targeted_tiebreak", "compact",
                            "elimination", "primary", "adaptive", "explicit"});
    one_of("target_rule", target_rule, {"mean", "median"});
    one_of("restart_pick", restart_pick, {"last", "middle"});
    one_of("compact_rule", compact_rule, {"max_d", "sum_d"});
    one_of("elimination_rule", elimination_rule, {"random", "span_max", "span_min", "span_mean"});
    one_of("u_rule", u_rule, {"mean", "max"});
    one_of("max_size_rule", max_size_rule, {"per_pseudocode", "per_text"});
    one_of("refinement", refinement, {"none", "approach1", "approach2"});
    one_of("objective", objective, {"span_sum", "span_sum_squared", "span_mean_sum"});
    one_of("termination", termination, {"fixed_point", "objective_local_min"});
    one_of("variant", variant, {"plain", "regret"});
    one_of("restart_mode", restart_mode, {"second", "third", "farthest", "stochastic"});
    one_of("quality_convention", quality_convention, {"exclude", "include"});
    one_of("quality_denominator", quality_denominator, {"cluster_size", "non_centroid_size"});

    require(k >= 1, "k must be at least 1");
    require(std::isfinite(weight) && weight >= 0.0, "weight must be a finite value >= 0");
    require(weight == 0.0 || algorithm == "kminsum", "weight applies to kminsum only");
    require(sym_tol >= 0.0, "sym_tol must be >= 0");
    require(!target || std::isfinite(*target), "target must be finite");
    require(slack >= 0.0 && slack_fraction >= 0.0, "slack and slack_fraction must be >= 0");
    require(diversity_passes >= 1, "diversity_passes must be at least 1");
    require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
    require(global_min_size >= 2, "global_min_size must be at least 2");
    require(refinement == "none" || start == "primary", "refinement applies to start = primary");
    require(max_iterations >= 1, "max_iterations must be at least 1");
    require(f_start > 0.0 && f_start <= 1.0 && f_end > 0.0 && f_end <= 1.0, "f_start and f_end must lie in (0, 1]");
    require(partial_fraction >= 0.0 && partial_fraction <= 1.0, "partial_fraction must lie in [0, 1]");
    require(start != "explicit" || centroids.size() == k, "explicit start needs exactly k centroids");
    require(start == "explicit" || centroids.empty(), "centroids are only used with start = explicit");
    std::set<std::size_t> distinct(centroids.begin(), centroids.end());
    require(distinct.size() == centroids.size(), "explicit centroids must be distinct");
}

// ---------------------------------------------------------------------------------------------

json to_json(const RunConfig& cfg) {
    json j = json::object();
    visit_fields(cfg, [&](const char* name, const auto& field) {
        using T = std::decay_t<decltype(field)>;
        if constexpr (std::is_same_v<T, std::optional<double>>) {
            j[name] = field ? json(*field) : json(nullptr);
        } else {
            j[name] = field;
        }
    });
    return j;
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::ConfigError, "configuration must be a JSON object");
    }
    RunConfig             cfg;
    std::set<std::string> known;
    visit_fields(cfg, [&](const char* name, auto& field) {
        known.insert(name);
        const auto it = j.find(name);
        if (it == j.end()) {
            return;
        }
        using T = std::decay_t<decltype(field)>;
        try {
            if constexpr (std::is_same_v<T, std::optional<double>>) {
                field = it->is_null() ? std::nullopt : std::optional<double>(it->template get<double>());
            } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
                if (!it->is_number_unsigned()) {
                    throw Error(ErrorCode::ConfigError, std::string(name) + " must be a non-negative integer");
                }
                field = it->template get<T>();
            } else {
                field = it->template get<T>();
            }
        } catch (const json::exception&) {
            throw Error(ErrorCode::ConfigError, std::string("bad value for ") + name + ": " + it->dump());
        }
    });
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw Error(ErrorCode::ConfigError, "unknown configuration key '" + key + "'");
        }
    }
    return cfg;
}

// ---------------------------------------------------------------------------------------------

namespace {

EngineConfig engine_config(const RunConfig& cfg) {
    EngineConfig ec;
    ec.measure.kind            = cfg.algorithm == "kminmax" ? MeasureKind::min_max : MeasureKind::min_sum;
    ec.measure.weight_exponent = cfg.weight;
    ec.multi_centroid          = cfg.multi_centroid;
    ec.reassign_all            = cfg.reassign_all;
    ec.objective               = cfg.objective == "span_sum"           ? Objective::span_sum
                                 : cfg.objective == "span_sum_squared" ? Objective::span_sum_squared
                                                                       : Objective::span_mean_sum;
    ec.termination    = cfg.termination == "fixed_point" ? Termination::fixed_point : Termination::objective_local_min;
    ec.max_iterations = cfg.max_iterations;
    ec.use_accelerated_update = cfg.accelerated;
    return ec;
}

struct StartPoint {
    IndexSet                  centroids;
    std::optional<Clustering> clusters;  // Step-2 entry
};

IndexSet diversity_start(const RunConfig& cfg, const DistanceMatrix& m, std::vector<std::string>& notes) {
    const std::size_t k    = cfg.k;
    const Index       seed = cfg.seed_point;
    const auto        pick = cfg.restart_pick == "last" ? RestartPick::last : RestartPick::middle;
    const auto compact     = cfg.compact_rule == "max_d" ? CompactRule::max_d : CompactRule::sum_d;
    if (cfg.start == "simple") {
        return simple_diversity(m, k, seed).chosen;
    }
    if (cfg.start == "refined") {
        return refined_diversity(m, k, seed, pick, cfg.diversity_passes).chosen;
    }
    if (cfg.start == "compound") {
        return compound_diversity(m, k, cfg.k_check, seed, cfg.diversity_passes).chosen;
    }
    TargetSpec target_spec;
    target_spec.slack          = cfg.slack;
    target_spec.slack_fraction = cfg.slack_fraction;
    target_spec.rule           = cfg.target_rule == "mean" ? TargetRule::mean : TargetRule::median;
    if (cfg.start == "targeted") {
        target_spec.target = cfg.target ? *cfg.target : derive_target(simple_diversity(m, k, seed).mind_trace, target_spec.rule);
        return targeted_simple(m, k, target_spec, seed).chosen;
    }
    if (cfg.start == "targeted_tiebreak") {
        return targeted_tiebreak(m, k, target_spec, simple_diversity(m, k, seed), compact, cfg.diversity_passes).chosen;
    }
    if (cfg.start == "compact") {
        return compact_maxmin(m, k, cfg.slack, seed, compact).chosen;
    }
    // elimination
    EliminationOptions eo;
    eo.rule       = cfg.elimination_rule == "random"     ? EliminationRule::random
                    : cfg.elimination_rule == "span_max" ? EliminationRule::span_max
                    : cfg.elimination_rule == "span_min" ? EliminationRule::span_min
                                                         : EliminationRule::span_mean;
    eo.measure    = SeparationMeasure{cfg.algorithm == "kminmax" ? MeasureKind::min_max : MeasureKind::min_sum, 0.0};
    eo.iterate    = cfg.elimination_iterate;
    eo.max_passes = cfg.diversity_passes;
    eo.u_mode     = cfg.u_mode;
    eo.u_rule     = cfg.u_rule == "mean" ? ThresholdRule::mean : ThresholdRule::max;
    eo.rng_seed   = cfg.rng_seed;
    auto st       = successive_elimination(m, neighbor_order(m), k, eo);
    if (st.k_too_large) {
        notes.push_back("elimination ran out of points after " + std::to_string(st.chosen.size()) + " seeds");
    }
    return st.chosen;
}

StartPoint build_start(const RunConfig& cfg, const EngineConfig& ec, const DistanceMatrix& m,
                       std::vector<std::string>& notes) {
    StartPoint sp;
    if (cfg.start == "explicit") {
        for (const auto c : cfg.centroids) {
            if (c >= m.size()) {
                throw Error(ErrorCode::ConfigError, "centroid " + std::to_string(c) + " out of range");
            }
        }
        sp.centroids = cfg.centroids;
        return sp;
    }
    if (cfg.start == "primary" || cfg.start == "adaptive") {
        if (m.size() == 1) {
            sp.centroids = {0};
            return sp;
        }
        const auto order  = neighbor_order(m);
        const bool minmax = ec.measure.kind == MeasureKind::min_max;
        IntensityState state;
        if (cfg.start == "primary") {
            if (cfg.refinement != "none") {
                const auto approach =
                    cfg.refinement == "approach1" ? RefinementApproach::approach1 : RefinementApproach::approach2;
                state = cluster_size_refinement(m, order, cfg.k, approach, ec.measure.kind, std::nullopt, ec).second;
            } else {
                state = minmax ? primary_minmax(m, order, cfg.k) : primary_minsum(m, order, cfg.k);
            }
        } else {
            AdaptiveOptions ao;
            ao.lambda          = cfg.lambda;
            ao.global_min_size = cfg.global_min_size;
            ao.max_size_rule   = cfg.max_size_rule == "per_pseudocode" ? MaxSizeRule::per_pseudocode : MaxSizeRule::per_text;
            ao.allow_absorb    = cfg.allow_absorb;
            state = minmax ? adaptive_minmax(m, order, cfg.k, ao) : adaptive_minsum(m, order, cfg.k, ao);
            if (state.absorbed) {
                notes.push_back("adaptive start proposed k = " + std::to_string(state.clusters.size()));
            }
        }
        sp.clusters = to_clustering(state, ec.measure, m);
        return sp;
    }
    sp.centroids = diversity_start(cfg, m, notes);
    return sp;
}

RunReport run_engine(const RunConfig& cfg, const EngineConfig& ec, const DistanceMatrix& m, const StartPoint& sp,
                     StartEntry entry) {
    if (cfg.variant == "regret") {
        const FSchedule   schedule{cfg.f_start, cfg.f_end, cfg.f_ramp};
        const std::size_t cap = cfg.max_select == 0 ? unlimited : cfg.max_select;
        return sp.clusters ? run_regret_threshold(*sp.clusters, entry, ec, m, schedule, cap)
                           : run_regret_threshold(sp.centroids, ec, m, schedule, cap);
    }
    return sp.clusters ? run_kpc(*sp.clusters, entry, ec, m) : run_kpc(sp.centroids, ec, m);
}

std::string stop_name(StopReason r) {
    switch (r) {
        case StopReason::fixed_point: return "fixed_point";
        case StopReason::local_min: return "local_min";
        case StopReason::iteration_cap: return "iteration_cap";
    }
    return "unknown";
}

}  // namespace

io::Report run_on_matrix(const RunConfig& cfg, const DistanceMatrix& raw) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.k > raw.size()) {
        throw Error(ErrorCode::BadK, "k = " + std::to_string(cfg.k) + " exceeds n = " + std::to_string(raw.size()));
    }
    const EngineConfig ec = engine_config(cfg);
    const auto         m  = prepare_matrix(raw, ec.measure);

    io::Report out;
    out.config    = to_json(cfg);
    out.algorithm = cfg.algorithm;
    out.n         = m.size();
    out.k         = cfg.k;

    const auto sp     = build_start(cfg, ec, m, out.notes);
    RunReport  best   = run_engine(cfg, ec, m, sp, StartEntry::step2);
    double     best_o = span_objective(best.final, ec.objective);

    for (std::size_t r = 1; r <= cfg.restarts; ++r) {
        if (best.final.size() < 2) {
            out.notes.push_back("restarts skipped: single cluster");
            break;
        }
        StartPoint next;
        next.clusters = cfg.restart_mode == "stochastic"
                            ? stochastic_restart(best.final, ec, m,
                                                 cfg.stochastic_cutoff.value_or(std::numeric_limits<double>::infinity()),
                                                 cfg.rng_seed + r)
                            : diversified_restart(best.final, ec, m,
                                                  cfg.restart_mode == "second"  ? RestartMode::second
                                                  : cfg.restart_mode == "third" ? RestartMode::third
                                                                                : RestartMode::farthest,
                                                  cfg.partial_fraction);
        auto         run = run_engine(cfg, ec, m, next, StartEntry::step1);
        const double o   = span_objective(run.final, ec.objective);
        out.restart_objectives.push_back(o);
        if (o < best_o) {
            best_o = o;
            best   = std::move(run);
        }
    }

    for (const auto& c : best.final.clusters) {
        out.clusters.push_back({c.members, c.centroid, c.all_centroids, c.span});
    }
    out.objective         = best_o;
    out.objective_trace   = best.objective_trace;
    out.reassigned_counts = best.reassigned_counts;
    if (cfg.variant == "regret") {
        out.selected_counts = best.selected_counts;
    }
    out.iterations    = best.iterations;
    out.terminated_by = stop_name(best.terminated_by);

    if (best.final.size() >= 2) {
        QualityOptions qo;
        qo.convention  = cfg.quality_convention == "exclude" ? CentroidConvention::exclude : CentroidConvention::include;
        qo.denominator = cfg.quality_denominator == "cluster_size" ? Denominator::cluster_size
                                                                   : Denominator::non_centroid_size;
        qo.use_all_centroids = cfg.multi_centroid;
        const auto q         = quality(best.final, m, qo);
        out.value            = q.value;
        out.mean_o           = q.cluster_mean;
        out.cluster_d_o      = q.cluster_d_o;
    } else {
        out.notes.push_back("SingleCluster: Value needs at least two clusters");
    }
    out.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

namespace {

io::LoadOptions load_options(const RunConfig& cfg) {
    io::LoadOptions lo;
    lo.format  = io::parse_format(cfg.format);
    lo.metric  = io::parse_metric(cfg.metric);
    lo.sym_tol = cfg.sym_tol;
    if (cfg.header != "auto") {
        lo.header = cfg.header == "yes";
    }
    return lo;
}

DistanceMatrix load_input(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.input.empty()) {
        throw Error(ErrorCode::ConfigError, "no input file given");
    }
    return io::load_matrix(cfg.input, load_options(cfg));
}

}  // namespace

io::Report run_command(const RunConfig& cfg) { return run_on_matrix(cfg, load_input(cfg)); }

// ---------------------------------------------------------------------------------------------

std::vector<CompareRow> compare_starts_command(const RunConfig& cfg, const std::vector<std::string>& starts,
                                               std::size_t trials) {
    if (starts.size() < 2) {
        throw Error(ErrorCode::ConfigError, "compare needs at least two start methods");
    }
    if (trials < 1) {
        throw Error(ErrorCode::ConfigError, "trials must be at least 1");
    }
    for (const auto& s : starts) {
        RunConfig probe = cfg;
        probe.start     = s;
        if (s == "explicit") {
            throw Error(ErrorCode::ConfigError, "explicit starts cannot be compared");
        }
        probe.centroids.clear();
        probe.validate();
    }
    const auto raw = load_input(cfg);

    std::mt19937_64         rng(cfg.rng_seed);
    std::vector<CompareRow> rows;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t seed =
            t == 0 ? cfg.seed_point : std::uniform_int_distribution<std::size_t>(0, raw.size() - 1)(rng);
        for (const auto& s : starts) {
            RunConfig c  = cfg;
            c.start      = s;
            c.seed_point = seed;
            c.centroids.clear();
            const auto rep = run_on_matrix(c, raw);
            rows.push_back({s, t, seed, rep.iterations, rep.objective, rep.value, rep.terminated_by, rep.elapsed_ms});
        }
    }
    return rows;
}

namespace {

std::string opt_num(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

}  // namespace

std::string compare_csv(const std::vector<CompareRow>& rows, bool with_time) {
    std::ostringstream os;
    os << "start,trial,seed_point,iterations,objective,value,terminated_by" << (with_time ? ",wall_ms" : "") << "\n";
    for (const auto& r : rows) {
        os << r.start << ',' << r.trial << ',' << r.seed_point << ',' << r.iterations << ','
           << io::format_double(r.objective) << ',' << opt_num(r.value) << ',' << r.terminated_by;
        if (with_time) {
            os << ',' << io::format_double(r.wall_ms);
        }
        os << "\n";
    }
    return os.str();
}

std::vector<SweepRow> sweep_k_command(const RunConfig& cfg, std::size_t k_lo, std::size_t k_hi,
                                      std::optional<double> min_gap) {
    if (k_lo < 1 || k_lo > k_hi) {
        throw Error(ErrorCode::ConfigError, "empty k range");
    }
    RunConfig base = cfg;
    base.centroids.clear();
    if (base.start == "explicit") {
        throw Error(ErrorCode::ConfigError, "sweep needs a start method, not explicit centroids");
    }
    const auto raw = load_input(base);
    if (k_hi > raw.size()) {
        throw Error(ErrorCode::ConfigError, "k range exceeds n = " + std::to_string(raw.size()));
    }
    const auto m = prepare_matrix(raw, engine_config(base).measure);

    std::vector<double>      trace;
    std::vector<std::size_t> flags;
    if (k_hi >= 2) {
        const auto st = simple_diversity(m, k_hi, base.seed_point);
        trace         = st.mind_trace;
        double gap    = std::numeric_limits<double>::infinity();
        if (min_gap) {
            gap = *min_gap;
        } else if (trace.size() >= 2) {
            gap = 2.0 * (trace.front() - trace.back()) / static_cast<double>(trace.size() - 1);
        }
        flags = mind_trace_report(st, gap);
    }

    std::vector<SweepRow> rows;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        RunConfig c = base;
        c.k         = k;
        io::Report rep;
        try {
            rep = run_on_matrix(c, raw);
        } catch (const Error& e) {
            // Starts with a minimum k (refined, compound, targeted ...) fall back to simple below it.
            if (e.code() != ErrorCode::BadK && e.code() != ErrorCode::BadKCheck) {
                throw;
            }
            c.start = "simple";
            rep     = run_on_matrix(c, raw);
        }
        SweepRow row;
        row.k          = k;
        row.objective  = rep.objective;
        row.value      = rep.value;
        row.iterations = rep.iterations;
        if (k >= 2) {
            row.mind    = trace[k - 2];
            row.flagged = std::find(flags.begin(), flags.end(), k) != flags.end();
        }
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "k,objective,value,iterations,mind_d,flagged\n";
    for (const auto& r : rows) {
        os << r.k << ',' << io::format_double(r.objective) << ',' << opt_num(r.value) << ',' << r.iterations << ','
           << opt_num(r.mind) << ',' << (r.flagged ? 1 : 0) << "\n";
    }
    return os.str();
}

bool OracleSummary::ok() const {
    return std::all_of(suites.begin(), suites.end(), [](const auto& s) { return s.ok(); });
}

OracleSummary oracle_command(const oracle::SuiteOptions& primary, const oracle::SuiteOptions& adaptive) {
    OracleSummary out;
    for (const auto* o : {&primary, &adaptive}) {
        if (o->trials == 0) {
            out.warnings.push_back(std::string(o == &primary ? "primary_start" : "adaptive_start") +
                                   ": zero trials, the pass is vacuous");
        }
    }
    out.suites.push_back(oracle::primary_suite(primary));
    out.suites.push_back(oracle::adaptive_suite(adaptive));
    return out;
}

}  // namespace pcc

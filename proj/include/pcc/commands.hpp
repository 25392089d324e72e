#pragma once

#include "pcc/io.hpp"
#include "pcc/oracle.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pcc {

/// Every knob of a run. Field names double as JSON keys and CLI flags.
struct RunConfig {
    std::string input;
    std::string format = "auto";  // auto | dense | points | lower
    std::string metric = "euclidean";
    std::string header = "auto";  // auto | yes | no
    double      sym_tol = 1e-9;

    std::string algorithm = "kminmax";  // kminmax | kminsum
    std::size_t k         = 2;
    double      weight    = 0.0;  // p, kminsum only

    // simple | refined | compound | targeted | targeted_tiebreak | compact | elimination |
    // primary | adaptive | explicit
    std::string              start = "simple";
    std::vector<std::size_t> centroids;  // explicit start
    std::size_t              seed_point = 0;
    std::optional<double>    target;  // T; derived from a simple run when absent
    double                   slack          = 0.0;  // T_0
    double                   slack_fraction = 0.0;  // f
    std::string              target_rule    = "mean";
    std::size_t              k_check        = 2;
    std::string              restart_pick   = "last";
    std::size_t              diversity_passes = 10;
    std::string              compact_rule   = "max_d";
    std::string              elimination_rule = "span_max";
    bool                     elimination_iterate = false;
    bool                     u_mode   = false;
    std::string              u_rule   = "mean";
    double                   lambda   = 0.3;
    std::size_t              global_min_size = 2;
    std::string              max_size_rule   = "per_pseudocode";
    bool                     allow_absorb    = false;
    std::string              refinement      = "none";  // none | approach1 | approach2

    bool        multi_centroid = false;
    bool        reassign_all   = false;
    std::string objective      = "span_sum";
    std::string termination    = "fixed_point";
    std::size_t max_iterations = 100;
    bool        accelerated    = false;

    std::string variant = "plain";  // plain | regret
    double      f_start = 0.2;
    double      f_end   = 0.05;
    std::size_t f_ramp  = 10;
    std::size_t max_select = 0;  // 0: no cap

    std::size_t           restarts = 0;
    std::string           restart_mode = "second";  // second | third | farthest | stochastic
    double                partial_fraction = 1.0;
    std::optional<double> stochastic_cutoff;  // absent: no cutoff

    std::string quality_convention  = "exclude";
    std::string quality_denominator = "cluster_size";

    std::uint64_t rng_seed = 42;
    std::string   output;

    /// Throws ConfigError on an invalid value or combination.
    void validate() const;
};

/// Calls f(name, field) for every RunConfig field, in declaration order.
template <typename Config, typename F>
void visit_fields(Config& c, F&& f) {
    f("input", c.input);
    f("format", c.format);
    f("metric", c.metric);
    f("header", c.header);
    f("sym_tol", c.sym_tol);
    f("algorithm", c.algorithm);
    f("k", c.k);
    f("weight", c.weight);
    f("start", c.start);
    f("centroids", c.centroids);
    f("seed_point", c.seed_point);
    f("target", c.target);
    f("slack", c.slack);
    f("slack_fraction", c.slack_fraction);
    f("target_rule", c.target_rule);
    f("k_check", c.k_check);
    f("restart_pick", c.restart_pick);
    f("diversity_passes", c.diversity_passes);
    f("compact_rule", c.compact_rule);
    f("elimination_rule", c.elimination_rule);
    f("elimination_iterate", c.elimination_iterate);
    f("u_mode", c.u_mode);
    f("u_rule", c.u_rule);
    f("lambda", c.lambda);
    f("global_min_size", c.global_min_size);
    f("max_size_rule", c.max_size_rule);
    f("allow_absorb", c.allow_absorb);
    f("refinement", c.refinement);
    f("multi_centroid", c.multi_centroid);
    f("reassign_all", c.reassign_all);
    f("objective", c.objective);
    f("termination", c.termination);
    f("max_iterations", c.max_iterations);
    f("accelerated", c.accelerated);
    f("variant", c.variant);
    f("f_start", c.f_start);
    f("f_end", c.f_end);
    f("f_ramp", c.f_ramp);
    f("max_select", c.max_select);
    f("restarts", c.restarts);
    f("restart_mode", c.restart_mode);
    f("partial_fraction", c.partial_fraction);
    f("stochastic_cutoff", c.stochastic_cutoff);
    f("quality_convention", c.quality_convention);
    f("quality_denominator", c.quality_denominator);
    f("rng_seed", c.rng_seed);
    f("output", c.output);
}

nlohmann::json to_json(const RunConfig& cfg);
/// Unknown keys are a ConfigError; missing keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);

/// Loads the input, builds the start, runs the engine and evaluates the result.
io::Report run_command(const RunConfig& cfg);

/// Same as run_command on an already loaded (unweighted) matrix.
io::Report run_on_matrix(const RunConfig& cfg, const DistanceMatrix& raw);

struct CompareRow {
    std::string           start;
    std::size_t           trial      = 0;
    std::size_t           seed_point = 0;
    std::size_t           iterations = 0;
    double                objective  = 0.0;
    std::optional<double> value;
    std::string           terminated_by;
    double                wall_ms = 0.0;
};

std::vector<CompareRow> compare_starts_command(const RunConfig& cfg, const std::vector<std::string>& starts,
                                               std::size_t trials);
std::string compare_csv(const std::vector<CompareRow>& rows, bool with_time = true);

struct SweepRow {
    std::size_t           k = 0;
    double                objective = 0.0;
    std::optional<double> value;
    std::size_t           iterations = 0;
    std::optional<double> mind;  // MinD(i(k)) of a simple diversity run, k >= 2
    bool                  flagged = false;
};

/// `min_gap` flags k where MinD drops by more than this; absent means twice the mean drop.
std::vector<SweepRow> sweep_k_command(const RunConfig& cfg, std::size_t k_lo, std::size_t k_hi,
                                      std::optional<double> min_gap = std::nullopt);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct OracleSummary {
    std::vector<oracle::SuiteResult> suites;
    std::vector<std::string>         warnings;
    [[nodiscard]] bool ok() const;
};

OracleSummary oracle_command(const oracle::SuiteOptions& primary, const oracle::SuiteOptions& adaptive);

}  // namespace pcc

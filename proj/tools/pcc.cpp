// pcc: pseudo-centroid clustering from the command line.
#include "pcc/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using nlohmann::json;

struct ConfigFlags {
    pcc::RunConfig                  values;
    std::string                     config_file;
    double                          target            = 0.0;
    double                          stochastic_cutoff = 0.0;
    std::map<std::string, CLI::Option*> options;
};

void add_config_flags(CLI::App* app, ConfigFlags& flags) {
    app->add_option("--config", flags.config_file, "JSON configuration; explicit flags override it")
        ->check(CLI::ExistingFile);
    pcc::visit_fields(flags.values, [&](const char* name, auto& field) {
        using T                = std::decay_t<decltype(field)>;
        const std::string flag = std::string("--") + name;
        CLI::Option*      opt  = nullptr;
        if constexpr (std::is_same_v<T, bool>) {
            opt = app->add_flag(flag, field);
        } else if constexpr (std::is_same_v<T, std::optional<double>>) {
            opt = app->add_option(flag, std::string(name) == "target" ? flags.target : flags.stochastic_cutoff);
        } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
            opt = app->add_option(flag, field)->delimiter(',');
        } else {
            opt = app->add_option(flag, field);
        }
        flags.options[name] = opt;
    });
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw pcc::Error(pcc::ErrorCode::ParseError, "line 0: cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw pcc::Error(pcc::ErrorCode::ParseError, std::string("line 0: ") + e.what());
    }
}

// Config file first, then whatever was given on the command line.
pcc::RunConfig resolve(const ConfigFlags& flags) {
    json merged = flags.config_file.empty() ? json::object() : read_json_file(flags.config_file);
    if (!merged.is_object()) {
        throw pcc::Error(pcc::ErrorCode::ConfigError, "configuration must be a JSON object");
    }
    const json given = pcc::to_json(flags.values);
    for (const auto& [name, opt] : flags.options) {
        if (opt->count() == 0) {
            continue;
        }
        if (name == "target") {
            merged[name] = flags.target;
        } else if (name == "stochastic_cutoff") {
            merged[name] = flags.stochastic_cutoff;
        } else {
            merged[name] = given.at(name);
        }
    }
    auto cfg = pcc::config_from_json(merged);
    if (!cfg.input.empty()) {
        cfg.input = std::filesystem::absolute(cfg.input).lexically_normal().string();
    }
    cfg.validate();
    return cfg;
}

void write_out(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw pcc::Error(pcc::ErrorCode::ConfigError, "cannot write '" + path + "'");
    }
    out << text;
}

int exit_code(const pcc::Error& e) {
    return e.code() == pcc::ErrorCode::ParseError ? 3 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudo-centroid clustering (K-MinMax / K-MinSum)"};
    app.require_subcommand(1);

    ConfigFlags run_flags;
    auto*       run = app.add_subcommand("run", "cluster one input and emit a JSON report");
    add_config_flags(run, run_flags);

    ConfigFlags              cmp_flags;
    std::vector<std::string> starts;
    std::size_t              cmp_trials = 1;
    bool                     no_time    = false;
    auto*                    cmp        = app.add_subcommand("compare", "compare start methods, CSV table");
    add_config_flags(cmp, cmp_flags);
    cmp->add_option("--starts", starts, "start methods to compare")->delimiter(',')->required();
    cmp->add_option("--trials", cmp_trials, "runs per start; trial t > 0 draws its seed point from rng_seed");
    cmp->add_flag("--no_time", no_time, "leave out the wall_ms column");

    ConfigFlags           sweep_flags;
    std::size_t           k_lo = 1;
    std::size_t           k_hi = 0;
    double                min_gap = 0.0;
    auto*                 sweep   = app.add_subcommand("sweep", "run every k in a range, CSV table");
    add_config_flags(sweep, sweep_flags);
    sweep->add_option("--k_lo", k_lo, "first k");
    sweep->add_option("--k_hi", k_hi, "last k (default n)");
    auto* gap_opt = sweep->add_option("--min_gap", min_gap, "flag MinD drops larger than this");

    pcc::oracle::SuiteOptions t1;
    pcc::oracle::SuiteOptions t2;
    t2.trials = 200;
    t2.k_max  = 3;
    auto* orc = app.add_subcommand("oracle", "check the intensity starts against brute force");
    orc->add_option("--trials", t1.trials, "primary-start trials");
    orc->add_option("--adaptive_trials", t2.trials, "adaptive-start trials");
    orc->add_option("--n_min", t1.n_min);
    orc->add_option("--n_max", t1.n_max);
    orc->add_option("--k_min", t1.k_min);
    orc->add_option("--k_max", t1.k_max);
    orc->add_option("--seed", t1.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            const auto cfg    = resolve(run_flags);
            const auto report = pcc::run_command(cfg);
            write_out(cfg.output, pcc::io::emit_report(report));
            for (const auto& note : report.notes) {
                std::cerr << "note: " << note << "\n";
            }
        } else if (*cmp) {
            const auto cfg  = resolve(cmp_flags);
            const auto rows = pcc::compare_starts_command(cfg, starts, cmp_trials);
            write_out(cfg.output, pcc::compare_csv(rows, !no_time));
        } else if (*sweep) {
            const auto cfg = resolve(sweep_flags);
            std::size_t hi = k_hi;
            if (sweep->count("--k_hi") == 0) {
                pcc::io::LoadOptions lo;
                lo.format = pcc::io::parse_format(cfg.format);
                lo.metric = pcc::io::parse_metric(cfg.metric);
                if (cfg.header != "auto") {
                    lo.header = cfg.header == "yes";
                }
                lo.sym_tol = cfg.sym_tol;
                hi         = pcc::io::load_matrix(cfg.input, lo).size();
            }
            const auto rows = pcc::sweep_k_command(
                cfg, k_lo, hi, gap_opt->count() ? std::optional<double>(min_gap) : std::nullopt);
            write_out(cfg.output, pcc::sweep_csv(rows));
        } else if (*orc) {
            t2.n_min = t1.n_min;
            t2.n_max = t1.n_max;
            t2.k_min = t1.k_min;
            t2.k_max = std::min(t1.k_max, t2.k_max);
            t2.seed  = t1.seed;
            const auto summary = pcc::oracle_command(t1, t2);
            for (const auto& w : summary.warnings) {
                std::cerr << "warning: " << w << "\n";
            }
            for (const auto& s : summary.suites) {
                std::cout << s.name << ": " << s.passed << "/" << s.trials << " pass\n";
                for (const auto& f : s.failures) {
                    std::cout << "  " << f << "\n";
                }
            }
            return summary.ok() ? 0 : 4;
        }
    } catch (const pcc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

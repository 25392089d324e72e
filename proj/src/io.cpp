#include "pcc/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace pcc::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> to_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double v       = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t                   start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t                   i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',' || line[i] == '\r')) {
            ++i;
        }
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != ',' && line[j] != '\r') {
            ++j;
        }
        if (j > i) {
            out.push_back(line.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

bool skip_line(std::string_view line) {
    const auto t = trim(line);
    return t.empty() || t.front() == '#';
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

Table parse_csv(std::istream& in, std::optional<bool> header) {
    Table       t;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width  = 0;
    bool        first  = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_line(line)) {
            continue;
        }
        const auto fields = split(line, ',');
        if (first) {
            first            = false;
            const bool texty = std::any_of(fields.begin(), fields.end(), [](auto f) { return !to_number(f); });
            if (header.value_or(texty)) {
                for (const auto f : fields) {
                    t.header.emplace_back(f);
                }
                width = fields.size();
                continue;
            }
        }
        if (width == 0) {
            width = fields.size();
        }
        if (fields.size() != width) {
            fail(lineno, "expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto v = to_number(fields[c]);
            if (!v) {
                fail(lineno, "field " + std::to_string(c + 1) + " '" + std::string(fields[c]) + "' is not a number");
            }
            row.push_back(*v);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.rows.empty()) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": no data rows");
    }
    return t;
}

DistanceMatrix parse_lower_triangle(std::istream& in, double sym_tol) {
    std::string         line;
    std::size_t         lineno = 0;
    std::size_t         n      = 0;
    std::size_t         row    = 0;
    std::vector<double> flat;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_line(line)) {
            continue;
        }
        const auto tokens = split_ws(line);
        if (n == 0) {
            const auto v = tokens.size() == 1 ? to_number(tokens[0]) : std::nullopt;
            if (!v || *v < 1 || *v != static_cast<double>(static_cast<std::size_t>(*v))) {
                fail(lineno, "expected the point count n");
            }
            n = static_cast<std::size_t>(*v);
            flat.assign(n * n, 0.0);
            row = 1;
            continue;
        }
        if (row >= n) {
            fail(lineno, "more rows than n - 1 = " + std::to_string(n - 1));
        }
        if (tokens.size() != row) {
            fail(lineno, "row " + std::to_string(row) + " needs " + std::to_string(row) + " values, got " +
                             std::to_string(tokens.size()));
        }
        for (std::size_t c = 0; c < row; ++c) {
            const auto v = to_number(tokens[c]);
            if (!v) {
                fail(lineno, "value '" + std::string(tokens[c]) + "' is not a number");
            }
            flat[row * n + c] = flat[c * n + row] = *v;
        }
        ++row;
    }
    if (n == 0) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": missing point count");
    }
    if (row != n) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected " + std::to_string(n - 1) +
                                               " rows, got " + std::to_string(row - 1));
    }
    return DistanceMatrix::from_flat(n, std::move(flat), sym_tol);
}

DistanceMatrix parse_matrix(std::istream& in, const LoadOptions& options) {
    if (options.format == InputFormat::lower) {
        return parse_lower_triangle(in, options.sym_tol);
    }
    auto       table = parse_csv(in, options.header);
    const bool dense = options.format == InputFormat::dense ||
                       (options.format == InputFormat::auto_detect && table.rows.size() == table.rows.front().size());
    if (dense) {
        return DistanceMatrix::build(table.rows, options.sym_tol);
    }
    return from_points(table.rows, options.metric);
}

DistanceMatrix load_matrix(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ParseError, "line 0: cannot open '" + path + "'");
    }
    return parse_matrix(in, options);
}

std::string format_double(double v) {
    char       buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

InputFormat parse_format(const std::string& s) {
    if (s == "auto") return InputFormat::auto_detect;
    if (s == "dense") return InputFormat::dense;
    if (s == "points") return InputFormat::points;
    if (s == "lower") return InputFormat::lower;
    throw Error(ErrorCode::ConfigError, "unknown input format '" + s + "'");
}

Metric parse_metric(const std::string& s) {
    if (s == "euclidean") return Metric::euclidean;
    if (s == "squared_euclidean") return Metric::squared_euclidean;
    if (s == "manhattan") return Metric::manhattan;
    throw Error(ErrorCode::ConfigError, "unknown metric '" + s + "'");
}

// ---------------------------------------------------------------------------------------------

using nlohmann::json;

json clusters_json(const std::vector<ReportCluster>& clusters) {
    json out = json::array();
    for (const auto& c : clusters) {
        out.push_back({{"members", c.members}, {"centroid", c.centroid}, {"all_centroids", c.all_centroids},
                       {"span", c.span}});
    }
    return out;
}

json to_json(const Report& r) {
    json j;
    j["schema"]            = r.schema;
    j["config"]            = r.config;
    j["algorithm"]         = r.algorithm;
    j["n"]                 = r.n;
    j["k"]                 = r.k;
    j["clusters"]          = clusters_json(r.clusters);
    j["objective"]         = r.objective;
    j["objective_trace"]   = r.objective_trace;
    j["reassigned_counts"] = r.reassigned_counts;
    j["selected_counts"]   = r.selected_counts;
    j["iterations"]        = r.iterations;
    j["terminated_by"]     = r.terminated_by;
    j["value"]             = r.value ? json(*r.value) : json(nullptr);
    j["mean_o"]            = r.mean_o;
    j["cluster_d_o"]       = r.cluster_d_o;
    j["restart_objectives"] = r.restart_objectives;
    j["notes"]             = r.notes;
    j["elapsed_ms"]        = r.elapsed_ms;
    return j;
}

Report report_from_json(const json& j) {
    try {
        Report r;
        r.schema = j.at("schema").get<int>();
        if (r.schema != 1) {
            throw Error(ErrorCode::ParseError, "line 1: unsupported report schema " + std::to_string(r.schema));
        }
        r.config    = j.at("config");
        r.algorithm = j.at("algorithm").get<std::string>();
        r.n         = j.at("n").get<std::size_t>();
        r.k         = j.at("k").get<std::size_t>();
        for (const auto& c : j.at("clusters")) {
            ReportCluster rc;
            rc.members       = c.at("members").get<IndexSet>();
            rc.centroid      = c.at("centroid").get<Index>();
            rc.all_centroids = c.at("all_centroids").get<IndexSet>();
            rc.span          = c.at("span").get<double>();
            r.clusters.push_back(std::move(rc));
        }
        r.objective          = j.at("objective").get<double>();
        r.objective_trace    = j.at("objective_trace").get<std::vector<double>>();
        r.reassigned_counts  = j.at("reassigned_counts").get<std::vector<std::size_t>>();
        r.selected_counts    = j.at("selected_counts").get<std::vector<std::size_t>>();
        r.iterations         = j.at("iterations").get<std::size_t>();
        r.terminated_by      = j.at("terminated_by").get<std::string>();
        if (!j.at("value").is_null()) {
            r.value = j.at("value").get<double>();
        }
        r.mean_o             = j.at("mean_o").get<std::vector<double>>();
        r.cluster_d_o        = j.at("cluster_d_o").get<std::vector<double>>();
        r.restart_objectives = j.at("restart_objectives").get<std::vector<double>>();
        r.notes              = j.at("notes").get<std::vector<std::string>>();
        r.elapsed_ms         = j.at("elapsed_ms").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("line 0: malformed report: ") + e.what());
    }
}

std::string emit_report(const Report& r) { return to_json(r).dump(2) + "\n"; }

Report parse_report(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("line 0: ") + e.what());
    }
    return report_from_json(j);
}

}  // namespace pcc::io

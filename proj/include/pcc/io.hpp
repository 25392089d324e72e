#pragma once

#include "pcc/distance.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pcc::io {

enum class InputFormat { auto_detect, dense, points, lower };

struct LoadOptions {
    InputFormat         format = InputFormat::auto_detect;
    Metric              metric = Metric::euclidean;
    std::optional<bool> header;  // unset: a first row with a non-numeric field is a header
    double              sym_tol = DistanceMatrix::default_sym_tol;
};

struct Table {
    std::vector<std::vector<double>> rows;
    std::vector<std::string>         header;
};

/// Comma-separated numbers, one row per line. Blank lines and lines starting with '#' are skipped.
Table parse_csv(std::istream& in, std::optional<bool> header = std::nullopt);

/// First data line holds n, then line r = 1..n-1 holds d(r,0) .. d(r,r-1).
DistanceMatrix parse_lower_triangle(std::istream& in, double sym_tol = DistanceMatrix::default_sym_tol);

/// A dense table is used as-is when square (auto) and treated as coordinates otherwise.
DistanceMatrix parse_matrix(std::istream& in, const LoadOptions& options);
DistanceMatrix load_matrix(const std::string& path, const LoadOptions& options);

/// Shortest decimal text that reads back to the same double, '.' as separator.
std::string format_double(double v);

InputFormat parse_format(const std::string& s);
Metric      parse_metric(const std::string& s);

// ---------------------------------------------------------------------------------------------

struct ReportCluster {
    IndexSet members;
    Index    centroid = 0;
    IndexSet all_centroids;
    double   span = 0.0;

    bool operator==(const ReportCluster&) const = default;
};

struct Report {
    int                        schema = 1;
    nlohmann::json             config;
    std::string                algorithm;
    std::size_t                n = 0;
    std::size_t                k = 0;
    std::vector<ReportCluster> clusters;
    double                     objective = 0.0;
    std::vector<double>        objective_trace;
    std::vector<std::size_t>   reassigned_counts;
    std::vector<std::size_t>   selected_counts;
    std::size_t                iterations = 0;
    std::string                terminated_by;
    std::optional<double>      value;
    std::vector<double>        mean_o;
    std::vector<double>        cluster_d_o;
    std::vector<double>        restart_objectives;
    std::vector<std::string>   notes;
    double                     elapsed_ms = 0.0;

    bool operator==(const Report&) const = default;
};

nlohmann::json clusters_json(const std::vector<ReportCluster>& clusters);
nlohmann::json to_json(const Report& r);
Report         report_from_json(const nlohmann::json& j);

std::string emit_report(const Report& r);
Report      parse_report(const std::string& text);

}  // namespace pcc::io

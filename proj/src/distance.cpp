#include "pcc/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace pcc {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonSquare: return "NonSquare";
        case ErrorCode::NonZeroDiagonal: return "NonZeroDiagonal";
        case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::NegativeEntryWithWeighting: return "NegativeEntryWithWeighting";
        case ErrorCode::PointNotInCluster: return "PointNotInCluster";
        case ErrorCode::EmptyCluster: return "EmptyCluster";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::NoCentroids: return "NoCentroids";
        case ErrorCode::DuplicateCentroid: return "DuplicateCentroid";
        case ErrorCode::BadK: return "BadK";
        case ErrorCode::BadKCheck: return "BadKCheck";
        case ErrorCode::MatchPointDropped: return "MatchPointDropped";
        case ErrorCode::InconsistentSets: return "InconsistentSets";
        case ErrorCode::InfeasibleBounds: return "InfeasibleBounds";
        case ErrorCode::CombinatorialBlowup: return "CombinatorialBlowup";
        case ErrorCode::BadFraction: return "BadFraction";
        case ErrorCode::SingleCluster: return "SingleCluster";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

DistanceMatrix DistanceMatrix::build(const std::vector<std::vector<double>>& rows, double sym_tol) {
    const std::size_t n = rows.size();
    if (n == 0) {
        throw Error(ErrorCode::EmptyInput, "distance table has no rows");
    }
    std::vector<double> flat;
    flat.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) {
            throw Error(ErrorCode::NonSquare, "row " + std::to_string(i) + " has " +
                                                  std::to_string(rows[i].size()) + " entries, expected " +
                                                  std::to_string(n));
        }
        flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    return from_flat(n, std::move(flat), sym_tol);
}

DistanceMatrix DistanceMatrix::from_flat(std::size_t n, std::vector<double> entries, double sym_tol) {
    if (n == 0) {
        throw Error(ErrorCode::EmptyInput, "distance table has no rows");
    }
    if (entries.size() != n * n) {
        throw Error(ErrorCode::NonSquare, "expected " + std::to_string(n * n) + " entries, got " +
                                              std::to_string(entries.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = entries[i * n + j];
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFiniteEntry,
                            "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not finite");
            }
        }
        if (entries[i * n + i] != 0.0) {
            throw Error(ErrorCode::NonZeroDiagonal, "d(" + std::to_string(i) + "," + std::to_string(i) +
                                                        ") = " + std::to_string(entries[i * n + i]));
        }
    }
    const double tol       = sym_tol;
    bool         symmetric = true;
    for (std::size_t i = 0; i < n && symmetric; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(entries[i * n + j] - entries[j * n + i]) > tol) {
                symmetric = false;
                break;
            }
        }
    }
    DistanceMatrix m;
    m.n_         = n;
    m.d_         = std::move(entries);
    m.symmetric_ = symmetric;
    return m;
}

bool DistanceMatrix::has_negative_entry() const noexcept {
    return std::any_of(d_.begin(), d_.end(), [](double v) { return v < 0.0; });
}

bool DistanceMatrix::all_integral() const noexcept {
    return std::all_of(d_.begin(), d_.end(), [](double v) { return std::trunc(v) == v; });
}

DistanceMatrix from_points(const std::vector<std::vector<double>>& points, Metric metric) {
    if (points.empty()) {
        throw Error(ErrorCode::EmptyInput, "no points given");
    }
    const std::size_t dim = points.front().size();
    if (dim == 0) {
        throw Error(ErrorCode::EmptyInput, "points have dimension 0");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "point " + std::to_string(i) + " has dimension " +
                                                          std::to_string(points[i].size()) + ", expected " +
                                                          std::to_string(dim));
        }
    }
    const std::size_t   n = points.size();
    std::vector<double> flat(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double diff = points[i][c] - points[j][c];
                acc += metric == Metric::manhattan ? std::abs(diff) : diff * diff;
            }
            if (metric == Metric::euclidean) {
                acc = std::sqrt(acc);
            }
            flat[i * n + j] = acc;
            flat[j * n + i] = acc;
        }
    }
    return DistanceMatrix::from_flat(n, std::move(flat));
}

DistanceMatrix apply_weight(const DistanceMatrix& m, double p) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
        throw Error(ErrorCode::ConfigError, "weight exponent must be a finite value >= 0");
    }
    if (m.has_negative_entry()) {
        throw Error(ErrorCode::NegativeEntryWithWeighting, "weighting requires non-negative distances");
    }
    const std::size_t   n = m.size();
    std::vector<double> flat(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v  = m(i, j);
            flat[i * n + j] = p == 0.0 ? v : std::pow(v, p + 1.0);
        }
    }
    return DistanceMatrix::from_flat(n, std::move(flat));
}

DistanceMatrix prepare_matrix(const DistanceMatrix& m, const SeparationMeasure& measure) {
    if (measure.kind == MeasureKind::min_sum && measure.weight_exponent > 0.0) {
        return apply_weight(m, measure.weight_exponent);
    }
    return m;
}

double separate(const SeparationMeasure& measure, Index i, std::span<const Index> cluster,
                const DistanceMatrix& m) {
    if (std::find(cluster.begin(), cluster.end(), i) == cluster.end()) {
        throw Error(ErrorCode::PointNotInCluster, "point " + std::to_string(i) + " is not a member");
    }
    const auto   row        = m.row(i);
    bool         seen_other = false;
    double       acc        = 0.0;
    for (const Index j : cluster) {
        if (j == i) {
            continue;
        }
        if (measure.kind == MeasureKind::min_max) {
            acc        = seen_other ? std::max(acc, row[j]) : row[j];
            seen_other = true;
        } else {
            acc += row[j];
        }
    }
    return acc;
}

CentroidResult pseudo_centroid(const SeparationMeasure& measure, std::span<const Index> cluster,
                               const DistanceMatrix& m) {
    if (cluster.empty()) {
        throw Error(ErrorCode::EmptyCluster, "pseudo-centroid of an empty set");
    }
    CentroidResult result;
    result.span     = std::numeric_limits<double>::infinity();
    result.centroid = std::numeric_limits<Index>::max();
    for (const Index i : cluster) {
        const double s = separate(measure, i, cluster, m);
        if (s < result.span) {
            result.span = s;
            result.all_centroids.assign(1, i);
            result.centroid = i;
        } else if (s == result.span) {
            result.all_centroids.push_back(i);
            result.centroid = std::min(result.centroid, i);
        }
    }
    std::sort(result.all_centroids.begin(), result.all_centroids.end());
    return result;
}

namespace {

// Counting sort of one row when all off-diagonal entries are integers within a range of at
// most 4n. Iterating j in ascending order keeps equal distances in index order.
bool bucket_sort_row(const DistanceMatrix& m, Index i, std::uint32_t* out) {
    const std::size_t n   = m.size();
    const auto        row = m.row(i);
    double            lo  = std::numeric_limits<double>::infinity();
    double            hi  = -lo;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
            continue;
        }
        if (std::trunc(row[j]) != row[j]) {
            return false;
        }
        lo = std::min(lo, row[j]);
        hi = std::max(hi, row[j]);
    }
    if (hi - lo > 4.0 * static_cast<double>(n)) {
        return false;
    }
    const auto                 buckets = static_cast<std::size_t>(hi - lo) + 1;
    std::vector<std::uint32_t> start(buckets + 1, 0);
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
            ++start[static_cast<std::size_t>(row[j] - lo) + 1];
        }
    }
    std::partial_sum(start.begin(), start.end(), start.begin());
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
            out[start[static_cast<std::size_t>(row[j] - lo)]++] = static_cast<std::uint32_t>(j);
        }
    }
    return true;
}

}  // namespace

NeighborOrder::NeighborOrder(const DistanceMatrix& m) : n_(m.size()) {
    if (n_ < 2) {
        throw Error(ErrorCode::TooFewPoints, "neighbor order needs at least 2 points");
    }
    order_.resize(n_ * (n_ - 1));
    for (std::size_t i = 0; i < n_; ++i) {
        std::uint32_t* out = order_.data() + i * (n_ - 1);
        if (bucket_sort_row(m, i, out)) {
            continue;
        }
        std::uint32_t* w = out;
        for (std::size_t j = 0; j < n_; ++j) {
            if (j != i) {
                *w++ = static_cast<std::uint32_t>(j);
            }
        }
        const auto row = m.row(i);
        std::stable_sort(out, out + (n_ - 1),
                         [&](std::uint32_t a, std::uint32_t b) { return row[a] < row[b]; });
    }
}

NeighborOrder neighbor_order(const DistanceMatrix& m) { return NeighborOrder(m); }

}  // namespace pcc

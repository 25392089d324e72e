#pragma once

#include "pcc/error.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pcc {

using Index    = std::size_t;
using IndexSet = std::vector<Index>;

/// Dense n x n table of pairwise distances. Entries may be negative and need not form a
/// metric; the only structural requirement is a zero diagonal. Immutable after construction.
class DistanceMatrix {
  public:
    static constexpr double default_sym_tol = 1e-9;

    /// Validates `rows` (square, finite, zero diagonal). `sym_tol` is an absolute
    /// tolerance; the matrix is flagged symmetric iff every |d(i,j) - d(j,i)| is within it.
    static DistanceMatrix build(const std::vector<std::vector<double>>& rows,
                                double sym_tol = default_sym_tol);

    /// Same as build() but from a row-major flat buffer of n*n entries.
    static DistanceMatrix from_flat(std::size_t n, std::vector<double> entries,
                                    double sym_tol = default_sym_tol);

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] bool is_symmetric() const noexcept { return symmetric_; }

    [[nodiscard]] double operator()(Index i, Index j) const noexcept { return d_[i * n_ + j]; }

    [[nodiscard]] std::span<const double> row(Index i) const noexcept {
        return {d_.data() + i * n_, n_};
    }

    [[nodiscard]] bool has_negative_entry() const noexcept;
    [[nodiscard]] bool all_integral() const noexcept;

  private:
    DistanceMatrix() = default;

    std::size_t         n_ = 0;
    std::vector<double> d_;
    bool                symmetric_ = false;
};

enum class Metric { euclidean, squared_euclidean, manhattan };

DistanceMatrix from_points(const std::vector<std::vector<double>>& points, Metric metric);

/// d'(i,j) = d(i,j)^(p+1), i.e. the weight w(D) = D^p folded into the distance itself.
DistanceMatrix apply_weight(const DistanceMatrix& m, double p);

enum class MeasureKind { min_max, min_sum };

struct SeparationMeasure {
    MeasureKind kind = MeasureKind::min_max;
    // MinSum only. Applied once to the matrix via prepare_matrix(); every algorithm in the
    // library reads distances from the matrix it is handed.
    double weight_exponent = 0.0;
};

/// Returns the matrix the clustering algorithms should run on for `measure`: the weighted
/// matrix for MinSum with a positive exponent, an unchanged copy otherwise.
DistanceMatrix prepare_matrix(const DistanceMatrix& m, const SeparationMeasure& measure);

/// Max (MinMax) or sum (MinSum) of d(i,j) over j in `cluster` minus i. 0 for a singleton.
double separate(const SeparationMeasure& measure, Index i, std::span<const Index> cluster,
                const DistanceMatrix& m);

struct CentroidResult {
    Index    centroid = 0;
    double   span     = 0.0;
    IndexSet all_centroids;  // ascending
};

/// Pseudo-centroid of `cluster`: lowest-index minimizer of separate(), plus every tied minimizer.
CentroidResult pseudo_centroid(const SeparationMeasure& measure, std::span<const Index> cluster,
                               const DistanceMatrix& m);

/// For every point, the other n-1 points in ascending distance d(i, .). Equal distances are
/// ordered by ascending index. Built once in O(n^2 log n) (or O(n^2) when every row holds
/// integers within an O(n) range) and shared by every intensity-based start.
class NeighborOrder {
  public:
    NeighborOrder() = default;
    explicit NeighborOrder(const DistanceMatrix& m);

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

    [[nodiscard]] std::span<const std::uint32_t> of(Index i) const noexcept {
        return {order_.data() + i * (n_ - 1), n_ - 1};
    }

  private:
    std::size_t                n_ = 0;
    std::vector<std::uint32_t> order_;
};

NeighborOrder neighbor_order(const DistanceMatrix& m);

}  // namespace pcc

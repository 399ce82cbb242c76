#pragma once

#include "starmap/core.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace starmap {

/// Exact k nearest neighbors, rows sorted by ascending distance (ties by smaller index).
struct KnnIndex {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::uint32_t> ids;  // n*k, row-major
    std::vector<double> dists;       // n*k, row-major

    std::span<const std::uint32_t> neighbors(std::size_t i) const { return {ids.data() + i * k, k}; }
    std::span<const double> distances(std::size_t i) const { return {dists.data() + i * k, k}; }
};

struct Calibration {
    double rho = 0.0;
    double sigma = 1.0;
};

struct Edge {
    std::uint32_t i;
    std::uint32_t j;
    double w;
};

/**
 * Symmetric fuzzy membership graph.
 *
 * Each unordered pair is stored once with i < j. `degree[i]` is the sum of
 * the weights of all edges touching i.
 */
struct FuzzyGraph {
    std::size_t n = 0;
    std::vector<Edge> edges;
    std::vector<double> rho;
    std::vector<double> sigma;
    std::vector<double> degree;

    double max_weight() const;

    /// Dense n x n weight matrix; intended for small test instances.
    std::vector<double> dense() const;
};

/// Brute-force exact kNN. Requires 1 <= k < X.rows() and finite input.
KnnIndex build_knn(const DataMatrix& X, std::size_t k, std::size_t threads = default_thread_count());

/**
 * Finds rho and sigma for one point so that
 * sum_l exp(-max(0, d_l - rho) / sigma) == target, by bisection.
 *
 * sigma is confined to [1e-3 * mean(dists), 1e3]; when the target is not
 * reachable inside that interval the nearest bound is returned.
 */
Calibration smooth_knn_calibrate(std::span<const double> dists, double target);

/// Same with the default target log2(k), k = dists.size().
Calibration smooth_knn_calibrate(std::span<const double> dists);

/// Directed memberships w_{j|i} laid out like `index.ids`.
std::vector<double> directed_weights(const KnnIndex& index, std::span<const Calibration> calib);

/// Probabilistic t-conorm a + b - ab.
inline double fuzzy_or(double a, double b) noexcept { return a + b - a * b; }

/// Symmetrizes directed weights with the fuzzy union and fills degrees.
FuzzyGraph fuzzy_union(const KnnIndex& index, std::span<const double> directed,
                       std::span<const Calibration> calib);

/// kNN search, calibration, directed weights and union in one call.
FuzzyGraph build_fuzzy_graph(const DataMatrix& X, std::size_t k,
                             std::size_t threads = default_thread_count());

/// Writes the edge list as CSV `i,j,w` with a header line.
void write_edges_csv(std::ostream& out, const FuzzyGraph& graph);

}  // namespace starmap

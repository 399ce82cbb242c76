#pragma once

#include "starmap/core.hpp"

#include <cstdint>
#include <vector>

namespace starmap {

struct Anchors {
    DataMatrix centers;                     // C x D
    std::vector<std::uint32_t> assignment;  // N, values in [0, C)
    std::vector<std::size_t> counts;        // C, all positive
    std::vector<double> wcss_history;       // objective after seeding and after every Lloyd iteration
    std::size_t iterations = 0;

    std::size_t size() const noexcept { return counts.size(); }
};

struct KmeansOptions {
    std::size_t max_iter = 100;
    double tol = 1e-6;
};

/// Within-cluster sum of squared distances.
double wcss(const DataMatrix& X, const DataMatrix& centers, std::span<const std::uint32_t> assignment);

/// Lloyd iterations from k-means++ seeding. Empty clusters are refilled with the
/// point farthest from its current center.
Anchors kmeans_fit(const DataMatrix& X, std::size_t C, std::uint64_t seed, const KmeansOptions& options = {});

/// Anchor count from sample size: max(1, min(floor(N / 500), 100)).
std::size_t heuristic_C(std::size_t n);

/// Projection of X to min(50, D) principal dimensions when D > threshold, X itself otherwise.
DataMatrix maybe_prereduce(const DataMatrix& X, std::size_t threshold_D);

/// Per-cluster means of the rows of X.
DataMatrix cluster_means(const DataMatrix& X, std::span<const std::uint32_t> assignment, std::size_t C);

/**
 * Anchors for the embedding: clusters on the (possibly pre-reduced) data,
 * then expresses the centers in the original space of X as per-cluster
 * means of the original rows.
 */
Anchors find_anchors(const DataMatrix& X, std::size_t C, std::uint64_t seed, std::size_t prereduce_threshold = 50,
                     const KmeansOptions& options = {});

}  // namespace starmap

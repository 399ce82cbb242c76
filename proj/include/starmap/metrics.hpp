#pragma once

#include "starmap/core.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace starmap {

struct MetricReport {
    double knn_accuracy = std::numeric_limits<double>::quiet_NaN();  // NaN when no labels
    double distance_correlation = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_pairs_sampled = 0;
    double elapsed_seconds = 0.0;
};

/**
 * Leave-one-out kNN classification accuracy in the embedding.
 *
 * Each point is predicted by majority vote over its k nearest other points
 * (distance ties by smaller index). A tie between classes goes to the tied
 * class that occurs nearest in the neighbor list.
 */
double knn_accuracy(const DataMatrix& Y, std::span<const int> labels, std::size_t k = 5,
                    std::size_t threads = default_thread_count());

struct DistanceCorrelation {
    double value = 0.0;
    std::size_t pairs = 0;
};

/**
 * Pearson correlation between pairwise distances in X and in Y.
 *
 * Uses every pair i < j when there are at most `max_pairs` of them, and
 * otherwise `max_pairs` pairs drawn uniformly (with replacement) from a
 * stream seeded with `seed`.
 */
DistanceCorrelation distance_correlation(const DataMatrix& X, const DataMatrix& Y,
                                         std::size_t max_pairs = 5'000'000, std::uint64_t seed = 0);

}  // namespace starmap

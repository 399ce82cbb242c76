#pragma once

#include "starmap/core.hpp"

#include <cstdint>
#include <vector>

namespace starmap {

struct PcaModel {
    std::vector<double> mean;               // D
    DataMatrix components;                  // Q x D, orthonormal rows
    std::vector<double> explained_variance; // Q, nonincreasing, (n-1) denominator

    std::size_t dim() const noexcept { return mean.size(); }
    std::size_t rank() const noexcept { return explained_variance.size(); }
};

struct PcaOptions {
    /// Above this many columns the randomized solver is used instead of the exact one.
    std::size_t exact_max_cols = 2000;
    std::size_t power_iterations = 20;
    std::size_t oversampling = 10;
    std::uint64_t seed = 0;
};

/**
 * Top-q principal directions of the mean-centered rows of `M`.
 *
 * Each component is oriented so that its entry of largest magnitude is
 * nonnegative, which makes repeated fits on the same data bit-identical.
 * Null directions of rank-deficient data come back with zero variance.
 */
PcaModel fit_pca(const DataMatrix& M, std::size_t q, const PcaOptions& options = {});

/// (M - mean) * components^T.
DataMatrix transform(const PcaModel& model, const DataMatrix& M);

struct JointEmbedding {
    DataMatrix points;  // N x q
    DataMatrix stars;   // C x q
};

/// Fits PCA on [X; A] and splits the projected rows into points and stars.
JointEmbedding joint_embed(const DataMatrix& X, const DataMatrix& A, std::size_t q,
                           const PcaOptions& options = {});

/// Scale factor that maps the largest absolute coordinate of Y0 and S to `target_extent`.
/// Returns 1 when every coordinate is zero.
double init_scale_factor(const DataMatrix& Y0, const DataMatrix* S, double target_extent);

/// Multiplies Y0 and (if present) S by one common factor; see init_scale_factor.
void rescale_init(DataMatrix& Y0, DataMatrix* S, double target_extent = 10.0);

}  // namespace starmap

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace starmap {

/// Raised for violated preconditions on user-supplied data (shapes, ranges, non-finite values).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Dense row-major matrix of doubles.
 *
 * Rows are observations, so `row(i)` is a contiguous span that the distance
 * kernels and the optimizer consume directly.
 */
class DataMatrix {
public:
    DataMatrix() = default;

    /// Zero-filled matrix. Both dimensions must be positive.
    DataMatrix(std::size_t rows, std::size_t cols);

    /// Takes ownership of `values` (row-major). Rejects size mismatch and non-finite entries.
    DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static DataMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    /// True when every entry is finite.
    bool all_finite() const noexcept;

    /// Stack `top` over `bottom`; column counts must agree.
    static DataMatrix vstack(const DataMatrix& top, const DataMatrix& bottom);

    /// Copy of rows [begin, end).
    DataMatrix slice_rows(std::size_t begin, std::size_t end) const;

    friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/**
 * xoshiro256** generator seeded through splitmix64.
 *
 * All derived draws (uniform reals, bounded integers, normals) are computed
 * here rather than through <random> distributions, whose output is
 * implementation-defined, so that a seed replays the same sequence on every
 * platform.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;

    /// Uniform integer in [0, bound). `bound` must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Standard normal via Box-Muller (one value per call, no caching).
    double normal() noexcept;

    /// Independent stream for worker `index`; derived deterministically from this seed.
    Rng split(std::uint64_t index) const noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

double squared_distance(std::span<const double> u, std::span<const double> v);
double euclidean_distance(std::span<const double> u, std::span<const double> v);

/// Unchecked squared distance for hot loops; caller guarantees equal lengths.
inline double squared_distance_unchecked(const double* u, const double* v, std::size_t n) noexcept {
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        const double d = u[l] - v[l];
        s += d * d;
    }
    return s;
}

/// Worker count: STARMAP_THREADS if set and positive, otherwise hardware concurrency.
std::size_t default_thread_count();

/**
 * Runs `body(begin, end)` over contiguous chunks of [0, n) on up to
 * `threads` workers. Chunks are fixed by (n, threads) alone, so any body
 * that writes only to its own index range produces identical output for
 * every thread count.
 */
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace starmap

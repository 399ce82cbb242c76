#include "starmap/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

namespace starmap {

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) {
        throw InvalidArgument("DataMatrix: rows and cols must be positive");
    }
    data_.assign(rows * cols, 0.0);
}

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (rows == 0 || cols == 0) {
        throw InvalidArgument("DataMatrix: rows and cols must be positive");
    }
    if (data_.size() != rows * cols) {
        throw InvalidArgument("DataMatrix: expected " + std::to_string(rows * cols) + " values, got " +
                              std::to_string(data_.size()));
    }
    if (!all_finite()) {
        throw InvalidArgument("DataMatrix: non-finite value");
    }
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) {
        throw InvalidArgument("DataMatrix: no rows");
    }
    const std::size_t cols = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.size() != cols) {
            throw InvalidArgument("DataMatrix: ragged rows");
        }
        values.insert(values.end(), r.begin(), r.end());
    }
    return DataMatrix(rows.size(), cols, std::move(values));
}

bool DataMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DataMatrix DataMatrix::vstack(const DataMatrix& top, const DataMatrix& bottom) {
    if (top.cols() != bottom.cols()) {
        throw InvalidArgument("vstack: column mismatch (" + std::to_string(top.cols()) + " vs " +
                              std::to_string(bottom.cols()) + ")");
    }
    std::vector<double> values(top.data_);
    values.insert(values.end(), bottom.data_.begin(), bottom.data_.end());
    return DataMatrix(top.rows() + bottom.rows(), top.cols(), std::move(values));
}

DataMatrix DataMatrix::slice_rows(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > rows_) {
        throw InvalidArgument("slice_rows: bad range");
    }
    std::vector<double> values(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                               data_.begin() + static_cast<std::ptrdiff_t>(end * cols_));
    return DataMatrix(end - begin, cols_, std::move(values));
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) {
        s = splitmix64(x);
    }
}

std::uint64_t Rng::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
    // Rejection on the top of the range removes modulo bias.
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

double Rng::normal() noexcept {
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::split(std::uint64_t index) const noexcept {
    std::uint64_t x = seed_ ^ (0xd1b54a32d192ed03ULL * (index + 1));
    return Rng(splitmix64(x));
}

double squared_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw InvalidArgument("distance: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                              std::to_string(v.size()) + ")");
    }
    return squared_distance_unchecked(u.data(), v.data(), u.size());
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
    return std::sqrt(squared_distance(u, v));
}

std::size_t default_thread_count() {
    if (const char* env = std::getenv("STARMAP_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) {
            return static_cast<std::size_t>(n);
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n));
    if (threads == 1) {
        body(0, n);
        return;
    }
    const std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) {
            break;
        }
        pool.emplace_back(body, begin, end);
    }
    for (auto& th : pool) {
        th.join();
    }
}

}  // namespace starmap

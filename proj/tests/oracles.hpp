#pragma once

// Test-only reference computations. Each one is written the slow, obvious way
// and shares no code path with the library routine it checks.

#include "starmap/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

using starmap::DataMatrix;
using starmap::Rng;

inline DataMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    std::vector<double> v(rows * cols);
    for (double& x : v) {
        x = scale * rng.normal();
    }
    return DataMatrix(rows, cols, std::move(v));
}

inline double dist(const DataMatrix& M, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t l = 0; l < M.cols(); ++l) {
        s += std::pow(M(i, l) - M(j, l), 2);
    }
    return std::sqrt(s);
}

/// Full sort of every candidate by (distance, index).
inline std::vector<std::vector<std::size_t>> brute_knn(const DataMatrix& X, std::size_t k) {
    std::vector<std::vector<std::size_t>> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        std::vector<std::size_t> order;
        for (std::size_t j = 0; j < X.rows(); ++j) {
            if (j != i) {
                order.push_back(j);
            }
        }
        std::vector<double> d(X.rows());
        for (std::size_t j = 0; j < X.rows(); ++j) {
            d[j] = dist(X, i, j);
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
        order.resize(k);
        out[i] = order;
    }
    return out;
}

/// C = A * B^T with plain loops.
inline std::vector<double> matmul_bt(const std::vector<double>& A, std::size_t n, std::size_t d,
                                     const std::vector<double>& B, std::size_t q) {
    std::vector<double> C(n * q, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < q; ++p) {
            for (std::size_t j = 0; j < d; ++j) {
                C[i * q + p] += A[i * d + j] * B[p * d + j];
            }
        }
    }
    return C;
}

/// Fuzzy cross-entropy written straight from the formula, ordered pairs.
inline double cross_entropy(const DataMatrix& Y, const std::vector<double>& W, double a, double b) {
    const std::size_t n = Y.rows();
    double L = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double r = dist(Y, i, j);
            double v = 1.0 / (1.0 + a * std::pow(r, 2.0 * b));
            v = std::min(std::max(v, 1e-12), 1.0 - 1e-12);
            L += -W[i * n + j] * std::log(v) - (1.0 - W[i * n + j]) * std::log(1.0 - v);
        }
    }
    return L;
}

/// Central differences of -f with step h, for every coordinate of Y.
template <class F>
DataMatrix negative_fd_gradient(DataMatrix Y, F&& f, double h) {
    DataMatrix G(Y.rows(), Y.cols());
    for (std::size_t i = 0; i < Y.rows(); ++i) {
        for (std::size_t l = 0; l < Y.cols(); ++l) {
            const double keep = Y(i, l);
            Y(i, l) = keep + h;
            const double up = f(Y);
            Y(i, l) = keep - h;
            const double down = f(Y);
            Y(i, l) = keep;
            G(i, l) = -(up - down) / (2.0 * h);
        }
    }
    return G;
}

/// Symmetric random weights in [0, 1] with a zero diagonal.
inline std::vector<double> random_weights(std::size_t n, Rng& rng) {
    std::vector<double> W(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            W[i * n + j] = W[j * n + i] = rng.uniform();
        }
    }
    return W;
}

/// Points with every pairwise distance at least `min_gap`.
inline DataMatrix spread_points(std::size_t n, std::size_t q, Rng& rng, double box, double min_gap) {
    DataMatrix Y(n, q);
    for (std::size_t i = 0; i < n; ++i) {
        bool ok = false;
        while (!ok) {
            for (std::size_t l = 0; l < q; ++l) {
                Y(i, l) = box * (2.0 * rng.uniform() - 1.0);
            }
            ok = true;
            for (std::size_t j = 0; j < i; ++j) {
                ok = ok && dist(Y, i, j) >= min_gap;
            }
        }
    }
    return Y;
}

/// Plain Lloyd from C distinct random points; returns the best WCSS over `restarts`.
inline double best_random_restart_wcss(const DataMatrix& X, std::size_t C, std::size_t restarts, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = X.rows(), d = X.cols();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t i = 0; i < C; ++i) {
            std::swap(idx[i], idx[i + rng.below(n - i)]);
        }
        std::vector<double> centers(C * d);
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t l = 0; l < d; ++l) {
                centers[c * d + l] = X(idx[c], l);
            }
        }
        std::vector<std::size_t> assign(n, 0);
        for (int it = 0; it < 200; ++it) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                double bd = std::numeric_limits<double>::infinity();
                std::size_t bc = 0;
                for (std::size_t c = 0; c < C; ++c) {
                    double s = 0.0;
                    for (std::size_t l = 0; l < d; ++l) {
                        s += std::pow(X(i, l) - centers[c * d + l], 2);
                    }
                    if (s < bd) {
                        bd = s;
                        bc = c;
                    }
                }
                changed = changed || bc != assign[i];
                assign[i] = bc;
            }
            std::vector<double> sum(C * d, 0.0);
            std::vector<std::size_t> cnt(C, 0);
            for (std::size_t i = 0; i < n; ++i) {
                ++cnt[assign[i]];
                for (std::size_t l = 0; l < d; ++l) {
                    sum[assign[i] * d + l] += X(i, l);
                }
            }
            for (std::size_t c = 0; c < C; ++c) {
                if (cnt[c] > 0) {
                    for (std::size_t l = 0; l < d; ++l) {
                        centers[c * d + l] = sum[c * d + l] / static_cast<double>(cnt[c]);
                    }
                }
            }
            if (!changed && it > 0) {
                break;
            }
        }
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < d; ++l) {
                w += std::pow(X(i, l) - centers[assign[i] * d + l], 2);
            }
        }
        best = std::min(best, w);
    }
    return best;
}

}  // namespace oracle

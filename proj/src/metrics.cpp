#include "starmap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace starmap {

double knn_accuracy(const DataMatrix& Y, std::span<const int> labels, std::size_t k, std::size_t threads) {
    const std::size_t n = Y.rows();
    if (labels.size() != n) {
        throw InvalidArgument("knn_accuracy: label count != N");
    }
    if (k < 1 || k >= n) {
        throw InvalidArgument("knn_accuracy: need 1 <= k < N");
    }
    if (std::set<int>(labels.begin(), labels.end()).size() < 2) {
        throw InvalidArgument("knn_accuracy: need at least two classes");
    }
    std::vector<unsigned char> correct(n, 0);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::uint32_t>> cand(n - 1);
        std::vector<std::pair<int, std::size_t>> votes;  // (label, count) in order of first appearance
        for (std::size_t i = begin; i < end; ++i) {
            std::size_t c = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    cand[c++] = {squared_distance_unchecked(Y.row(i).data(), Y.row(j).data(), Y.cols()),
                                 static_cast<std::uint32_t>(j)};
                }
            }
            std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
            votes.clear();
            for (std::size_t l = 0; l < k; ++l) {
                const int lab = labels[cand[l].second];
                auto it = std::find_if(votes.begin(), votes.end(), [&](const auto& v) { return v.first == lab; });
                if (it == votes.end()) {
                    votes.emplace_back(lab, 1);
                } else {
                    ++it->second;
                }
            }
            // first maximum in first-appearance order is the nearest tied class
            const auto best = std::max_element(votes.begin(), votes.end(),
                                               [](const auto& x, const auto& y) { return x.second < y.second; });
            correct[i] = best->first == labels[i];
        }
    });
    const auto hits = std::count(correct.begin(), correct.end(), 1);
    return static_cast<double>(hits) / static_cast<double>(n);
}

namespace {

// Streaming co-moments (Welford).
struct Comoments {
    double n = 0.0, mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;

    void add(double x, double y) noexcept {
        n += 1.0;
        const double dx = x - mx;
        const double dy = y - my;
        const double f = (n - 1.0) / n;
        mx += dx / n;
        my += dy / n;
        // same expression for all three so that swapping x and y is exact
        sxx += dx * dx * f;
        syy += dy * dy * f;
        sxy += dx * dy * f;
    }
};

}  // namespace

DistanceCorrelation distance_correlation(const DataMatrix& X, const DataMatrix& Y, std::size_t max_pairs,
                                         std::uint64_t seed) {
    const std::size_t n = X.rows();
    if (Y.rows() != n) {
        throw InvalidArgument("distance_correlation: row count mismatch (" + std::to_string(n) + " vs " +
                              std::to_string(Y.rows()) + ")");
    }
    if (n < 3) {
        throw InvalidArgument("distance_correlation: need at least 3 points");
    }
    if (max_pairs < 2) {
        throw InvalidArgument("distance_correlation: max_pairs must be at least 2");
    }
    Comoments m;
    auto visit = [&](std::size_t i, std::size_t j) {
        const double dx = std::sqrt(squared_distance_unchecked(X.row(i).data(), X.row(j).data(), X.cols()));
        const double dy = std::sqrt(squared_distance_unchecked(Y.row(i).data(), Y.row(j).data(), Y.cols()));
        m.add(dx, dy);
    };
    const std::size_t total = n * (n - 1) / 2;
    if (total <= max_pairs) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                visit(i, j);
            }
        }
    } else {
        Rng rng(seed);
        for (std::size_t s = 0; s < max_pairs; ++s) {
            const std::size_t i = rng.below(n);
            std::size_t j = rng.below(n - 1);
            j += j >= i ? 1 : 0;
            visit(std::min(i, j), std::max(i, j));
        }
    }
    if (!(m.sxx > 0.0) || !(m.syy > 0.0)) {
        throw InvalidArgument("distance_correlation: zero variance in pairwise distances");
    }
    return {m.sxy / (std::sqrt(m.sxx) * std::sqrt(m.syy)), static_cast<std::size_t>(m.n)};
}

}  // namespace starmap

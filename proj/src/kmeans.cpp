#include "starmap/kmeans.hpp"

#include "starmap/pca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace starmap {

namespace {

struct Nearest {
    std::uint32_t index;
    double dist2;
};

Nearest nearest_center(const double* x, const DataMatrix& centers) {
    Nearest best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t c = 0; c < centers.rows(); ++c) {
        const double d2 = squared_distance_unchecked(x, centers.row(c).data(), centers.cols());
        if (d2 < best.dist2) {
            best = {static_cast<std::uint32_t>(c), d2};
        }
    }
    return best;
}

std::size_t sample_by_weight(const std::vector<double>& weight, double total, Rng& rng) {
    const std::size_t n = weight.size();
    double r = rng.uniform() * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
        r -= weight[i];
        if (r < 0.0 && weight[i] > 0.0) {
            pick = i;
            break;
        }
    }
    // rounding can run off the end onto an already chosen point
    while (weight[pick] <= 0.0 && pick > 0) {
        --pick;
    }
    return pick;
}

// Greedy k-means++: each step draws 2 + floor(ln C) candidates by squared
// distance and keeps the one that lowers the potential most.
DataMatrix plus_plus_seeds(const DataMatrix& X, std::size_t C, Rng& rng) {
    const std::size_t n = X.rows();
    const std::size_t dim = X.cols();
    const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(C)));
    DataMatrix centers(C, dim);
    std::vector<double> closest(n, std::numeric_limits<double>::infinity());
    std::vector<double> candidate(n), best(n);

    std::size_t pick = rng.below(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        closest[i] = squared_distance_unchecked(X.row(i).data(), X.row(pick).data(), dim);
        total += closest[i];
    }
    std::copy_n(X.row(pick).data(), dim, centers.row(0).data());

    for (std::size_t c = 1; c < C; ++c) {
        if (total <= 0.0) {
            pick = rng.below(n);
            std::copy_n(X.row(pick).data(), dim, centers.row(c).data());
            continue;
        }
        double best_total = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < trials; ++t) {
            const std::size_t cand = sample_by_weight(closest, total, rng);
            double cand_total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                candidate[i] = std::min(closest[i], squared_distance_unchecked(X.row(i).data(), X.row(cand).data(), dim));
                cand_total += candidate[i];
            }
            if (cand_total < best_total) {
                best_total = cand_total;
                pick = cand;
                best.swap(candidate);
            }
        }
        closest.swap(best);
        total = best_total;
        std::copy_n(X.row(pick).data(), dim, centers.row(c).data());
    }
    return centers;
}

void assign_all(const DataMatrix& X, const DataMatrix& centers, std::vector<std::uint32_t>& assignment,
                std::vector<double>& dist2) {
    parallel_for(X.rows(), default_thread_count(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Nearest nc = nearest_center(X.row(i).data(), centers);
            assignment[i] = nc.index;
            dist2[i] = nc.dist2;
        }
    });
}

std::vector<std::size_t> tally(std::span<const std::uint32_t> assignment, std::size_t C) {
    std::vector<std::size_t> counts(C, 0);
    for (auto a : assignment) {
        ++counts[a];
    }
    return counts;
}

// Moves the worst-fitting point of a multi-member cluster into each empty cluster.
void repair_empty(const DataMatrix& X, DataMatrix& centers, std::vector<std::uint32_t>& assignment,
                  std::vector<double>& dist2, std::vector<std::size_t>& counts) {
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] != 0) {
            continue;
        }
        std::size_t worst = X.rows();
        double worst_d = -1.0;
        for (std::size_t i = 0; i < X.rows(); ++i) {
            if (counts[assignment[i]] > 1 && dist2[i] > worst_d) {
                worst_d = dist2[i];
                worst = i;
            }
        }
        if (worst == X.rows()) {
            throw std::logic_error("kmeans: cannot repair empty cluster");
        }
        --counts[assignment[worst]];
        assignment[worst] = static_cast<std::uint32_t>(c);
        dist2[worst] = 0.0;
        counts[c] = 1;
        std::copy_n(X.row(worst).data(), X.cols(), centers.row(c).data());
    }
}

}  // namespace

double wcss(const DataMatrix& X, const DataMatrix& centers, std::span<const std::uint32_t> assignment) {
    double total = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        total += squared_distance_unchecked(X.row(i).data(), centers.row(assignment[i]).data(), X.cols());
    }
    return total;
}

DataMatrix cluster_means(const DataMatrix& X, std::span<const std::uint32_t> assignment, std::size_t C) {
    if (assignment.size() != X.rows()) {
        throw InvalidArgument("cluster_means: assignment length != N");
    }
    DataMatrix means(C, X.cols());
    std::vector<std::size_t> counts(C, 0);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        const auto c = assignment[i];
        ++counts[c];
        auto m = means.row(c);
        const auto x = X.row(i);
        for (std::size_t j = 0; j < X.cols(); ++j) {
            m[j] += x[j];
        }
    }
    for (std::size_t c = 0; c < C; ++c) {
        if (counts[c] == 0) {
            throw InvalidArgument("cluster_means: empty cluster " + std::to_string(c));
        }
        for (double& v : means.row(c)) {
            v /= static_cast<double>(counts[c]);
        }
    }
    return means;
}

Anchors kmeans_fit(const DataMatrix& X, std::size_t C, std::uint64_t seed, const KmeansOptions& options) {
    const std::size_t n = X.rows();
    if (C < 1 || C > n) {
        throw InvalidArgument("kmeans_fit: need 1 <= C <= N (C=" + std::to_string(C) + ", N=" + std::to_string(n) + ")");
    }
    Rng rng(seed);
    Anchors out;
    out.centers = plus_plus_seeds(X, C, rng);
    out.assignment.assign(n, 0);
    std::vector<double> dist2(n, 0.0);

    assign_all(X, out.centers, out.assignment, dist2);
    out.counts = tally(out.assignment, C);
    repair_empty(X, out.centers, out.assignment, dist2, out.counts);
    out.wcss_history.push_back(wcss(X, out.centers, out.assignment));

    for (std::size_t it = 0; it < options.max_iter; ++it) {
        if (it > 0) {
            assign_all(X, out.centers, out.assignment, dist2);
            out.counts = tally(out.assignment, C);
            repair_empty(X, out.centers, out.assignment, dist2, out.counts);
        }
        const DataMatrix updated = cluster_means(X, out.assignment, C);
        double shift = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            shift = std::max(shift, euclidean_distance(updated.row(c), out.centers.row(c)));
        }
        out.centers = updated;
        out.wcss_history.push_back(wcss(X, out.centers, out.assignment));
        out.iterations = it + 1;
        if (shift < options.tol) {
            break;
        }
    }

    // Final nearest-center pass; kept only if it leaves no cluster empty.
    std::vector<std::uint32_t> final_assignment(n);
    assign_all(X, out.centers, final_assignment, dist2);
    auto final_counts = tally(final_assignment, C);
    if (std::none_of(final_counts.begin(), final_counts.end(), [](std::size_t k) { return k == 0; })) {
        out.assignment = std::move(final_assignment);
        out.counts = std::move(final_counts);
    }
    return out;
}

std::size_t heuristic_C(std::size_t n) { return std::max<std::size_t>(1, std::min<std::size_t>(n / 500, 100)); }

DataMatrix maybe_prereduce(const DataMatrix& X, std::size_t threshold_D) {
    if (X.cols() <= threshold_D) {
        return X;
    }
    const std::size_t q = std::min<std::size_t>({50, X.cols(), X.rows()});
    return transform(fit_pca(X, q), X);
}

Anchors find_anchors(const DataMatrix& X, std::size_t C, std::uint64_t seed, std::size_t prereduce_threshold,
                     const KmeansOptions& options) {
    if (X.cols() <= prereduce_threshold) {
        return kmeans_fit(X, C, seed, options);
    }
    Anchors a = kmeans_fit(maybe_prereduce(X, prereduce_threshold), C, seed, options);
    a.centers = cluster_means(X, a.assignment, C);
    return a;
}

}  // namespace starmap

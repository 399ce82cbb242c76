#include "starmap/knn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace starmap {

double FuzzyGraph::max_weight() const {
    double m = 0.0;
    for (const auto& e : edges) {
        m = std::max(m, e.w);
    }
    return m;
}

std::vector<double> FuzzyGraph::dense() const {
    std::vector<double> W(n * n, 0.0);
    for (const auto& e : edges) {
        W[e.i * n + e.j] = e.w;
        W[e.j * n + e.i] = e.w;
    }
    return W;
}

KnnIndex build_knn(const DataMatrix& X, std::size_t k, std::size_t threads) {
    const std::size_t n = X.rows();
    if (k < 1 || k >= n) {
        throw InvalidArgument("build_knn: need 1 <= k < N (k=" + std::to_string(k) + ", N=" +
                              std::to_string(n) + ")");
    }
    if (!X.all_finite()) {
        throw InvalidArgument("build_knn: non-finite input");
    }
    KnnIndex index;
    index.n = n;
    index.k = k;
    index.ids.resize(n * k);
    index.dists.resize(n * k);

    const std::size_t dim = X.cols();
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::uint32_t>> cand(n - 1);
        for (std::size_t i = begin; i < end; ++i) {
            const double* xi = X.row(i).data();
            std::size_t c = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                cand[c++] = {squared_distance_unchecked(xi, X.row(j).data(), dim),
                             static_cast<std::uint32_t>(j)};
            }
            // pair ordering gives (distance, index) lexicographic ties
            std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
            for (std::size_t l = 0; l < k; ++l) {
                index.ids[i * k + l] = cand[l].second;
                index.dists[i * k + l] = std::sqrt(cand[l].first);
            }
        }
    });
    return index;
}

namespace {

double membership_sum(std::span<const double> dists, double rho, double sigma) {
    double s = 0.0;
    for (double d : dists) {
        s += std::exp(-std::max(0.0, d - rho) / sigma);
    }
    return s;
}

}  // namespace

Calibration smooth_knn_calibrate(std::span<const double> dists, double target) {
    if (dists.empty()) {
        throw InvalidArgument("smooth_knn_calibrate: empty distance row");
    }
    if (!(target > 0.0)) {
        throw InvalidArgument("smooth_knn_calibrate: target must be positive");
    }
    Calibration c;
    c.rho = dists.front();
    const double mean = std::accumulate(dists.begin(), dists.end(), 0.0) / static_cast<double>(dists.size());
    // all-zero rows would give a zero lower bound; sigma must stay positive
    const double lo_bound = std::max(1e-3 * mean, 1e-12);
    const double hi_bound = 1e3;

    // the sum is nondecreasing in sigma
    if (membership_sum(dists, c.rho, lo_bound) >= target) {
        c.sigma = lo_bound;
        return c;
    }
    if (membership_sum(dists, c.rho, hi_bound) <= target) {
        c.sigma = hi_bound;
        return c;
    }
    double lo = lo_bound;
    double hi = hi_bound;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double r = membership_sum(dists, c.rho, mid) - target;
        if (std::abs(r) < 1e-12 || hi - lo <= 1e-15 * hi) {
            break;
        }
        (r > 0.0 ? hi : lo) = mid;
    }
    c.sigma = mid;
    return c;
}

Calibration smooth_knn_calibrate(std::span<const double> dists) {
    return smooth_knn_calibrate(dists, std::log2(static_cast<double>(dists.size())));
}

std::vector<double> directed_weights(const KnnIndex& index, std::span<const Calibration> calib) {
    if (calib.size() != index.n) {
        throw InvalidArgument("directed_weights: calibration count != N");
    }
    std::vector<double> w(index.n * index.k);
    for (std::size_t i = 0; i < index.n; ++i) {
        const auto d = index.distances(i);
        for (std::size_t l = 0; l < index.k; ++l) {
            w[i * index.k + l] = std::exp(-std::max(0.0, d[l] - calib[i].rho) / calib[i].sigma);
        }
    }
    return w;
}

FuzzyGraph fuzzy_union(const KnnIndex& index, std::span<const double> directed,
                       std::span<const Calibration> calib) {
    if (directed.size() != index.n * index.k) {
        throw InvalidArgument("fuzzy_union: directed weight count mismatch");
    }
    // (lo, hi, w_{hi|lo}, w_{lo|hi}); exactly one of the two directions is set per entry
    struct Half {
        std::uint32_t lo, hi;
        double fwd, bwd;
    };
    std::vector<Half> halves;
    halves.reserve(directed.size());
    for (std::size_t i = 0; i < index.n; ++i) {
        const auto nb = index.neighbors(i);
        for (std::size_t l = 0; l < index.k; ++l) {
            const auto a = static_cast<std::uint32_t>(i);
            const auto b = nb[l];
            const double w = directed[i * index.k + l];
            if (a < b) {
                halves.push_back({a, b, w, 0.0});
            } else {
                halves.push_back({b, a, 0.0, w});
            }
        }
    }
    std::sort(halves.begin(), halves.end(),
              [](const Half& x, const Half& y) { return std::tie(x.lo, x.hi) < std::tie(y.lo, y.hi); });

    FuzzyGraph g;
    g.n = index.n;
    g.degree.assign(index.n, 0.0);
    for (std::size_t s = 0; s < halves.size();) {
        double fwd = halves[s].fwd;
        double bwd = halves[s].bwd;
        std::size_t t = s + 1;
        while (t < halves.size() && halves[t].lo == halves[s].lo && halves[t].hi == halves[s].hi) {
            fwd = std::max(fwd, halves[t].fwd);
            bwd = std::max(bwd, halves[t].bwd);
            ++t;
        }
        const double w = fuzzy_or(fwd, bwd);
        if (w > 0.0) {
            g.edges.push_back({halves[s].lo, halves[s].hi, w});
            g.degree[halves[s].lo] += w;
            g.degree[halves[s].hi] += w;
        }
        s = t;
    }
    g.rho.reserve(calib.size());
    g.sigma.reserve(calib.size());
    for (const auto& c : calib) {
        g.rho.push_back(c.rho);
        g.sigma.push_back(c.sigma);
    }
    return g;
}

FuzzyGraph build_fuzzy_graph(const DataMatrix& X, std::size_t k, std::size_t threads) {
    const KnnIndex index = build_knn(X, k, threads);
    std::vector<Calibration> calib(index.n);
    for (std::size_t i = 0; i < index.n; ++i) {
        calib[i] = smooth_knn_calibrate(index.distances(i));
    }
    const auto directed = directed_weights(index, calib);
    return fuzzy_union(index, directed, calib);
}

void write_edges_csv(std::ostream& out, const FuzzyGraph& graph) {
    out << "i,j,w\n";
    out.precision(17);
    for (const auto& e : graph.edges) {
        out << e.i << ',' << e.j << ',' << e.w << '\n';
    }
}

}  // namespace starmap

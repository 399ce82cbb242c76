#include "starmap/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace starmap {

std::string to_string(Method m) { return m == Method::umap ? "umap" : "starmap"; }

Method parse_method(const std::string& s) {
    if (s == "umap") {
        return Method::umap;
    }
    if (s == "starmap") {
        return Method::starmap;
    }
    throw InvalidArgument("unknown method '" + s + "' (expected umap or starmap)");
}

void Hyperparams::validate() const {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw InvalidArgument("hyperparams: a and b must be positive");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw InvalidArgument("hyperparams: lambda must lie in [0, 1]");
    }
    if (k < 1 || q < 1) {
        throw InvalidArgument("hyperparams: k and q must be positive");
    }
    if (!(initial_lr > 0.0) || !(clip > 0.0) || !(eps > 0.0)) {
        throw InvalidArgument("hyperparams: initial_lr, clip and eps must be positive");
    }
}

double similarity_sq(double d2, double a, double b) {
    return 1.0 / (1.0 + a * (d2 > 0.0 ? std::pow(d2, b) : 0.0));
}

double similarity(std::span<const double> yi, std::span<const double> yj, double a, double b) {
    return similarity_sq(squared_distance(yi, yj), a, b);
}

double attraction_coefficient(double d2, double w, double a, double b, double eps) {
    const double guarded = std::max(d2, eps * eps);
    return -2.0 * a * b * std::pow(guarded, b - 1.0) * similarity_sq(d2, a, b) * w;
}

double repulsion_coefficient(double d2, double w, double a, double b, double eps) {
    const double guarded = std::max(d2, eps * eps);
    return 2.0 * b / guarded * similarity_sq(d2, a, b) * (1.0 - w);
}

namespace {

std::vector<double> scaled_displacement(std::span<const double> from, std::span<const double> to, double coeff) {
    if (from.size() != to.size()) {
        throw InvalidArgument("force: dimension mismatch");
    }
    std::vector<double> out(from.size());
    for (std::size_t l = 0; l < from.size(); ++l) {
        out[l] = coeff * (from[l] - to[l]);
    }
    return out;
}

}  // namespace

std::vector<double> attraction_term(std::span<const double> yi, std::span<const double> yj, double w, double a,
                                    double b, double eps) {
    return scaled_displacement(yi, yj, attraction_coefficient(squared_distance(yi, yj), w, a, b, eps));
}

std::vector<double> repulsion_term(std::span<const double> yi, std::span<const double> yj, double w, double a,
                                   double b, double eps) {
    return scaled_displacement(yi, yj, repulsion_coefficient(squared_distance(yi, yj), w, a, b, eps));
}

std::vector<double> star_term(std::span<const double> yi, std::span<const double> star, double degree, double a,
                              double b, double eps) {
    return scaled_displacement(yi, star, star_coefficient(squared_distance(yi, star), degree, a, b, eps));
}

std::vector<double> blend_attraction(double lambda, std::span<const double> star, std::span<const double> neighbor) {
    if (star.size() != neighbor.size()) {
        throw InvalidArgument("blend_attraction: dimension mismatch");
    }
    std::vector<double> out(star.size());
    for (std::size_t l = 0; l < out.size(); ++l) {
        out[l] = (1.0 - lambda) * neighbor[l] + lambda * star[l];
    }
    return out;
}

namespace {

void random_unit(Rng& rng, std::span<double> out) {
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (double& v : out) {
            v = rng.normal();
            norm2 += v * v;
        }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : out) {
        v *= inv;
    }
}

}  // namespace

void sampled_repulsion(std::span<const double> yi, std::span<const double> yj, const Hyperparams& params, Rng& rng,
                       std::span<double> out) {
    const double d2 = squared_distance(yi, yj);
    const double c = clip_coeff(repulsion_coefficient(d2, 0.0, params.a, params.b, params.eps), params.clip);
    if (d2 == 0.0) {
        random_unit(rng, out);
        for (double& v : out) {
            v *= c * params.eps;
        }
        return;
    }
    for (std::size_t l = 0; l < out.size(); ++l) {
        out[l] = c * (yi[l] - yj[l]);
    }
}

double loss(const DataMatrix& Y, std::span<const double> W, const Hyperparams& params) {
    const std::size_t n = Y.rows();
    if (W.size() != n * n) {
        throw InvalidArgument("loss: weight matrix must be N x N");
    }
    constexpr double lo = 1e-12;
    constexpr double hi = 1.0 - 1e-12;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double v = std::clamp(similarity(Y.row(i), Y.row(j), params.a, params.b), lo, hi);
            const double w = W[i * n + j];
            total -= w * std::log(v) + (1.0 - w) * std::log(1.0 - v);
        }
    }
    return total;
}

double loss(const DataMatrix& Y, const FuzzyGraph& graph, const Hyperparams& params) {
    return loss(Y, graph.dense(), params);
}

DataMatrix pairwise_forces(const DataMatrix& Y, std::span<const double> W, const Hyperparams& params) {
    const std::size_t n = Y.rows();
    if (W.size() != n * n) {
        throw InvalidArgument("pairwise_forces: weight matrix must be N x N");
    }
    DataMatrix F(n, Y.cols());
    for (std::size_t i = 0; i < n; ++i) {
        auto fi = F.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double w = W[i * n + j];
            const double d2 = squared_distance(Y.row(i), Y.row(j));
            const double c = attraction_coefficient(d2, w, params.a, params.b, params.eps) +
                             repulsion_coefficient(d2, w, params.a, params.b, params.eps);
            for (std::size_t l = 0; l < Y.cols(); ++l) {
                fi[l] += c * (Y(i, l) - Y(j, l));
            }
        }
    }
    return F;
}

DataMatrix full_gradient(const DataMatrix& Y, std::span<const double> W, const Hyperparams& params) {
    DataMatrix G = pairwise_forces(Y, W, params);
    for (double& v : G.values()) {
        v *= 2.0;
    }
    return G;
}

DataMatrix full_gradient(const DataMatrix& Y, const FuzzyGraph& graph, const Hyperparams& params) {
    return full_gradient(Y, graph.dense(), params);
}

namespace {

// Directed copies of every edge with their firing periods.
struct Schedule {
    std::vector<std::uint32_t> head;
    std::vector<std::uint32_t> tail;
    std::vector<double> period;
    std::vector<double> next;

    explicit Schedule(const FuzzyGraph& g) {
        const double wmax = g.max_weight();
        const std::size_t m = 2 * g.edges.size();
        head.reserve(m);
        tail.reserve(m);
        period.reserve(m);
        for (const auto& e : g.edges) {
            const double p = wmax / e.w;
            head.push_back(e.i);
            tail.push_back(e.j);
            period.push_back(p);
            head.push_back(e.j);
            tail.push_back(e.i);
            period.push_back(p);
        }
        next = period;
    }
};

// Coordinate access; the parallel mode goes through relaxed atomics so that
// concurrent updates of shared points are well-defined (if lossy).
struct PlainAccess {
    static double load(const double* p) noexcept { return *p; }
    static void add(double* p, double v) noexcept { *p += v; }
};

struct RelaxedAccess {
    static double load(const double* p) noexcept {
        return std::atomic_ref<double>(*const_cast<double*>(p)).load(std::memory_order_relaxed);
    }
    static void add(double* p, double v) noexcept {
        std::atomic_ref<double> r(*p);
        r.store(r.load(std::memory_order_relaxed) + v, std::memory_order_relaxed);
    }
};

// Precomputed powers for the force coefficients; avoids std::pow in the inner loop.
struct Kernel {
    double a, b, eps2, clip;
    double eps2_pow_bm1;  // eps^2^(b-1)

    explicit Kernel(const Hyperparams& p)
        : a(p.a), b(p.b), eps2(p.eps * p.eps), clip(p.clip), eps2_pow_bm1(std::pow(p.eps * p.eps, p.b - 1.0)) {}

    // d2^(b-1) with the eps floor, and d2^b without it.
    void powers(double d2, double& pow_bm1, double& pow_b) const noexcept {
        if (d2 >= eps2) {
            pow_bm1 = std::exp((b - 1.0) * std::log(d2));
            pow_b = pow_bm1 * d2;
        } else {
            pow_bm1 = eps2_pow_bm1;
            pow_b = d2 > 0.0 ? std::pow(d2, b) : 0.0;
        }
    }

    double attraction(double d2) const noexcept {
        double pbm1, pb;
        powers(d2, pbm1, pb);
        return clip_coeff(-2.0 * a * b * pbm1 / (1.0 + a * pb), clip);
    }

    double repulsion(double d2) const noexcept {
        double pbm1, pb;
        powers(d2, pbm1, pb);
        return clip_coeff(2.0 * b / (std::max(d2, eps2) * (1.0 + a * pb)), clip);
    }
};

constexpr std::size_t kMaxDim = 16;

template <class Access>
void run_edges(std::size_t begin, std::size_t end, Schedule& sched, double* Y, std::size_t n, std::size_t q,
               const double* S, const std::uint32_t* assignment, double lambda, double epoch, double lr,
               std::size_t n_neg, double eps, const Kernel& kernel, Rng& rng) {
    double yi[kMaxDim], yj[kMaxDim], fi[kMaxDim], fj[kMaxDim], unit[kMaxDim];
    const bool stars = S != nullptr;
    for (std::size_t e = begin; e < end; ++e) {
        if (sched.next[e] > epoch) {
            continue;
        }
        const std::size_t i = sched.head[e];
        const std::size_t j = sched.tail[e];
        double* pi = Y + i * q;
        double* pj = Y + j * q;
        double d2 = 0.0;
        for (std::size_t l = 0; l < q; ++l) {
            yi[l] = Access::load(pi + l);
            yj[l] = Access::load(pj + l);
            const double d = yi[l] - yj[l];
            d2 += d * d;
        }
        const double ca = kernel.attraction(d2);
        if (stars) {
            const double* si = S + assignment[i] * q;
            const double* sj = S + assignment[j] * q;
            double di2 = 0.0;
            double dj2 = 0.0;
            for (std::size_t l = 0; l < q; ++l) {
                di2 += (yi[l] - si[l]) * (yi[l] - si[l]);
                dj2 += (yj[l] - sj[l]) * (yj[l] - sj[l]);
            }
            const double csi = kernel.attraction(di2);
            const double csj = kernel.attraction(dj2);
            for (std::size_t l = 0; l < q; ++l) {
                const double diff = yi[l] - yj[l];
                fi[l] = (1.0 - lambda) * (ca * diff) + lambda * (csi * (yi[l] - si[l]));
                fj[l] = (1.0 - lambda) * (ca * -diff) + lambda * (csj * (yj[l] - sj[l]));
            }
        } else {
            for (std::size_t l = 0; l < q; ++l) {
                const double diff = yi[l] - yj[l];
                fi[l] = ca * diff;
                fj[l] = ca * -diff;
            }
        }
        for (std::size_t l = 0; l < q; ++l) {
            Access::add(pi + l, lr * fi[l]);
            Access::add(pj + l, lr * fj[l]);
        }

        for (std::size_t p = 0; p < n_neg; ++p) {
            const std::size_t k = rng.below(n);
            if (k == i) {
                continue;
            }
            const double* pk = Y + k * q;
            double dk2 = 0.0;
            for (std::size_t l = 0; l < q; ++l) {
                yi[l] = Access::load(pi + l);
                const double d = yi[l] - Access::load(pk + l);
                fi[l] = d;
                dk2 += d * d;
            }
            const double cr = kernel.repulsion(dk2);
            if (dk2 == 0.0) {
                random_unit(rng, std::span<double>(unit, q));
                for (std::size_t l = 0; l < q; ++l) {
                    fi[l] = eps * unit[l];
                }
            }
            for (std::size_t l = 0; l < q; ++l) {
                Access::add(pi + l, lr * cr * fi[l]);
            }
        }
        sched.next[e] += sched.period[e];
    }
}

void check_finite(const DataMatrix& Y, std::size_t epoch) {
    for (std::size_t i = 0; i < Y.rows(); ++i) {
        for (double v : Y.row(i)) {
            if (!std::isfinite(v)) {
                throw NumericalError("optimize: non-finite coordinate for point " + std::to_string(i) +
                                     " after epoch " + std::to_string(epoch));
            }
        }
    }
}

}  // namespace

void optimize(EmbeddingState& state, const FuzzyGraph& graph, const Hyperparams& params, Method method,
              const OptimizeOptions& options) {
    params.validate();
    const std::size_t n = state.Y.rows();
    const std::size_t q = state.Y.cols();
    if (graph.n != n) {
        throw InvalidArgument("optimize: graph has " + std::to_string(graph.n) + " nodes, embedding has " +
                              std::to_string(n) + " points");
    }
    if (q > kMaxDim) {
        throw InvalidArgument("optimize: at most " + std::to_string(kMaxDim) + " output dimensions");
    }
    const bool stars = method == Method::starmap;
    if (stars) {
        if (state.S.empty() || state.S.cols() != q) {
            throw InvalidArgument("optimize: starmap mode needs a C x q star matrix");
        }
        if (state.assignment.size() != n) {
            throw InvalidArgument("optimize: starmap mode needs one star assignment per point");
        }
        for (auto m : state.assignment) {
            if (m >= state.S.rows()) {
                throw InvalidArgument("optimize: star assignment out of range");
            }
        }
    }
    if (graph.edges.empty()) {
        return;
    }

    Schedule sched(graph);
    const Kernel kernel(params);
    const std::size_t n_epochs = params.epochs_for(n);
    const std::size_t n_neg = options.negative_sampling ? params.negative_sample_rate : 0;
    double* Y = state.Y.values().data();
    const double* S = stars ? state.S.values().data() : nullptr;
    const std::uint32_t* assignment = stars ? state.assignment.data() : nullptr;
    const std::size_t m = sched.head.size();

    Rng rng(params.seed);
    const std::size_t threads = options.deterministic ? 1 : (options.threads ? options.threads : default_thread_count());
    std::vector<Rng> streams;
    for (std::size_t t = 0; t < threads; ++t) {
        streams.push_back(rng.split(t));
    }

    for (std::size_t epoch = 0; epoch < n_epochs; ++epoch) {
        const double lr = params.initial_lr * (1.0 - static_cast<double>(epoch) / static_cast<double>(n_epochs));
        const auto fire = static_cast<double>(epoch + 1);
        if (threads == 1) {
            run_edges<PlainAccess>(0, m, sched, Y, n, q, S, assignment, params.lambda, fire, lr, n_neg, params.eps,
                                   kernel, rng);
        } else {
            const std::size_t chunk = (m + threads - 1) / threads;
            std::vector<std::thread> pool;
            for (std::size_t t = 0; t < threads; ++t) {
                const std::size_t begin = t * chunk;
                const std::size_t end = std::min(m, begin + chunk);
                if (begin >= end) {
                    break;
                }
                pool.emplace_back([&, t, begin, end] {
                    run_edges<RelaxedAccess>(begin, end, sched, Y, n, q, S, assignment, params.lambda, fire, lr,
                                             n_neg, params.eps, kernel, streams[t]);
                });
            }
            for (auto& th : pool) {
                th.join();
            }
        }
        state.epoch += 1;
        check_finite(state.Y, state.epoch);
        if (options.on_epoch) {
            options.on_epoch(state.epoch, state.Y);
        }
    }
}

}  // namespace starmap

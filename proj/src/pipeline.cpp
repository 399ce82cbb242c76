#include "starmap/pipeline.hpp"

#include "starmap/kmeans.hpp"
#include "starmap/pca.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace starmap {

namespace {

template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

constexpr std::uint64_t kKmeansSalt = 0x6b6d65616e73ULL;

}  // namespace

std::size_t resolve_anchors(const RunConfig& cfg, std::size_t n) { return cfg.anchors.value_or(heuristic_C(n)); }

RunResult run(const LabeledDataset& data, const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const DataMatrix& X = data.X;
    const std::size_t n = X.rows();
    Hyperparams hp = cfg.hyperparams;
    hp.seed = cfg.seed;

    stage("config", [&] {
        hp.validate();
        if (n < hp.k + 1) {
            throw InvalidArgument("need N > k (N=" + std::to_string(n) + ", k=" + std::to_string(hp.k) + ")");
        }
        if (cfg.method == Method::starmap) {
            const std::size_t c = resolve_anchors(cfg, n);
            if (c < 1 || c > n) {
                throw InvalidArgument("anchor count must lie in [1, N] (got " + std::to_string(c) + ")");
            }
        }
        if (hp.q > X.cols()) {
            throw InvalidArgument("output dimension exceeds input dimension");
        }
    });

    const FuzzyGraph graph = stage("knn_graph", [&] { return build_fuzzy_graph(X, hp.k); });

    RunResult result;
    EmbeddingState state;
    const PcaOptions pca_options{.seed = cfg.seed};
    if (cfg.method == Method::starmap) {
        result.n_anchors = resolve_anchors(cfg, n);
        const Anchors anchors = stage("kmeans", [&] {
            return find_anchors(X, result.n_anchors, cfg.seed ^ kKmeansSalt, cfg.prereduce_threshold);
        });
        auto joint = stage("pca", [&] { return joint_embed(X, anchors.centers, hp.q, pca_options); });
        stage("pca", [&] { rescale_init(joint.points, &joint.stars, cfg.init_extent); });
        state.Y = std::move(joint.points);
        state.S = std::move(joint.stars);
        result.initial_stars = state.S;
        state.assignment = anchors.assignment;
    } else {
        state.Y = stage("pca", [&] {
            DataMatrix Y0 = transform(fit_pca(X, hp.q, pca_options), X);
            rescale_init(Y0, nullptr, cfg.init_extent);
            return Y0;
        });
    }

    OptimizeOptions opt;
    opt.deterministic = cfg.deterministic;
    stage("optimize", [&] { optimize(state, graph, hp, cfg.method, opt); });
    result.n_epochs = state.epoch;

    result.report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (cfg.compute_metrics) {
        stage("metrics", [&] {
            const auto dc = distance_correlation(X, state.Y, cfg.max_pairs, cfg.seed);
            result.report.distance_correlation = dc.value;
            result.report.n_pairs_sampled = dc.pairs;
            const LabelColumn* col = nullptr;
            if (!cfg.label_column.empty()) {
                col = data.label(cfg.label_column);
                if (col == nullptr) {
                    throw InvalidArgument("no label column '" + cfg.label_column + "'");
                }
            } else if (!data.labels.empty()) {
                col = &data.labels.back();
            }
            if (col != nullptr && col->n_classes() >= 2) {
                result.report.knn_accuracy = knn_accuracy(state.Y, col->values, 5);
            }
        });
    }

    result.Y = std::move(state.Y);
    if (cfg.method == Method::starmap) {
        result.stars = std::move(state.S);
        result.assignment = std::move(state.assignment);
    }
    return result;
}

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    if (values.empty()) {
        s.mean = s.sd = std::nan("");
        return s;
    }
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

std::vector<CompareRow> compare(const LabeledDataset& data, const std::vector<RunConfig>& configs, std::size_t repeats) {
    if (repeats < 1) {
        throw InvalidArgument("compare: repeats must be at least 1");
    }
    std::vector<CompareRow> rows;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        CompareRow row;
        row.config_index = c;
        row.method = configs[c].method;
        std::vector<double> acc, dc, secs;
        for (std::size_t r = 0; r < repeats; ++r) {
            RunConfig cfg = configs[c];
            cfg.seed = configs[c].seed + r;
            try {
                const RunResult res = run(data, cfg);
                row.runs.push_back(res.report);
                if (!std::isnan(res.report.knn_accuracy)) {
                    acc.push_back(res.report.knn_accuracy);
                }
                dc.push_back(res.report.distance_correlation);
                secs.push_back(res.report.elapsed_seconds);
            } catch (const std::exception& e) {
                row.errors.push_back("seed " + std::to_string(cfg.seed) + ": " + e.what());
            }
        }
        row.knn_accuracy = summarize(acc);
        row.distance_correlation = summarize(dc);
        row.elapsed_seconds = summarize(secs);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace starmap

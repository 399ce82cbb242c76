#pragma once

#include "starmap/datasets.hpp"
#include "starmap/knn_graph.hpp"
#include "starmap/metrics.hpp"
#include "starmap/optimizer.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace starmap {

/// Failure inside one pipeline stage; what() is "<stage>: <cause>".
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& cause)
        : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct RunConfig {
    Method method = Method::starmap;
    Hyperparams hyperparams;
    std::optional<std::size_t> anchors;  // nullopt: heuristic_C(N)
    std::size_t prereduce_threshold = 50;
    bool deterministic = true;
    std::uint64_t seed = 0;
    double init_extent = 10.0;
    /// Label column scored by kNN accuracy; empty selects the last (finest) column.
    std::string label_column;
    std::size_t max_pairs = 5'000'000;
    bool compute_metrics = true;
};

struct RunResult {
    DataMatrix Y;
    std::optional<DataMatrix> stars;
    std::optional<DataMatrix> initial_stars;  // stars as handed to the optimizer
    std::optional<std::vector<std::uint32_t>> assignment;
    MetricReport report;
    std::size_t n_anchors = 0;
    std::size_t n_epochs = 0;
};

/// Anchor count a config resolves to for N points.
std::size_t resolve_anchors(const RunConfig& cfg, std::size_t n);

/**
 * kNN graph, then (starmap) anchors, joint PCA of points and anchors, or
 * (umap) PCA of the points alone, then a common rescale and optimization.
 * Metrics are computed when requested and labels exist.
 */
RunResult run(const LabeledDataset& data, const RunConfig& cfg);

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation; 0 for a single run
};

struct CompareRow {
    std::size_t config_index = 0;
    Method method = Method::starmap;
    std::vector<MetricReport> runs;
    std::vector<std::string> errors;  // one per failed repeat
    MetricSummary knn_accuracy;
    MetricSummary distance_correlation;
    MetricSummary elapsed_seconds;
};

/// Each config is run `repeats` times with seeds cfg.seed + r.
std::vector<CompareRow> compare(const LabeledDataset& data, const std::vector<RunConfig>& configs, std::size_t repeats);

MetricSummary summarize(const std::vector<double>& values);

}  // namespace starmap

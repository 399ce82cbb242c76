#include "starmap/cli.hpp"

#include "starmap/datasets.hpp"
#include "starmap/kmeans.hpp"
#include "starmap/pipeline.hpp"
#include "starmap/plot.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

namespace starmap::cli {

namespace {

bool looks_numeric(const std::string& s) {
    if (s.empty()) {
        return false;
    }
    double v = 0.0;
    const char* first = s.data() + (s.front() == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto pos = s.find(',', start);
        const auto item = s.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
        if (!item.empty()) {
            out.push_back(item);
        }
        if (pos == std::string::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

LabeledDataset load_table(const std::string& path, const std::string& label_cols) {
    const auto cols = label_cols.empty() ? detect_label_columns(path) : split_list(label_cols);
    return load_csv(path, true, cols);
}

// Options shared by `embed` and the rerun mode of `eval`.
struct EmbedFlags {
    std::string method = "starmap";
    std::string anchors = "auto";
    double lambda = 0.1;
    std::size_t k = 20;
    std::size_t epochs = 0;
    double clip = 0.4;
    double a = 1.577;
    double b = 0.895;
    std::uint64_t seed = 0;
    bool deterministic = false;
    std::size_t prereduce = 50;

    void attach(CLI::App* app) {
        app->add_option("--method", method, "umap or starmap")->check(CLI::IsMember({"umap", "starmap"}));
        app->add_option("--anchors", anchors, "number of anchors, or 'auto' for min(N/500, 100)");
        app->add_option("--lambda", lambda, "share of star attraction in [0, 1]")->check(CLI::Range(0.0, 1.0));
        app->add_option("--k", k, "neighbors in the kNN graph")->check(CLI::PositiveNumber);
        app->add_option("--epochs", epochs, "optimization epochs (0: 500 for N <= 10000, else 200)");
        app->add_option("--clip", clip, "bound on force coefficients")->check(CLI::PositiveNumber);
        app->add_option("--a", a, "similarity curve parameter a")->check(CLI::PositiveNumber);
        app->add_option("--b", b, "similarity curve parameter b")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "random seed");
        app->add_flag("--deterministic", deterministic, "single-threaded, bit-reproducible optimization");
        app->add_option("--prereduce-threshold", prereduce, "PCA before k-means when D exceeds this");
    }

    RunConfig config() const {
        RunConfig cfg;
        cfg.method = parse_method(method);
        cfg.hyperparams.lambda = lambda;
        cfg.hyperparams.k = k;
        cfg.hyperparams.n_epochs = epochs;
        cfg.hyperparams.clip = clip;
        cfg.hyperparams.a = a;
        cfg.hyperparams.b = b;
        cfg.seed = seed;
        cfg.deterministic = deterministic;
        cfg.prereduce_threshold = prereduce;
        if (anchors != "auto") {
            std::size_t c = 0;
            const auto [ptr, ec] = std::from_chars(anchors.data(), anchors.data() + anchors.size(), c);
            if (ec != std::errc() || ptr != anchors.data() + anchors.size() || c == 0) {
                throw CLI::ValidationError("--anchors", "expected a positive integer or 'auto', got '" + anchors + "'");
            }
            cfg.anchors = c;
        }
        return cfg;
    }
};

nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

std::string csv_number(double v) { return std::isnan(v) ? "" : format_real(v); }
std::string text_number(double v) { return std::isnan(v) ? "nan" : format_real(v); }

const LabelColumn* pick_label(const LabeledDataset& data, const std::string& name) {
    if (name.empty()) {
        return data.labels.empty() ? nullptr : &data.labels.back();
    }
    return data.label(name);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError(path + ": cannot open for writing");
    }
    f << text;
    if (!f.flush()) {
        throw IoError(path + ": write failed");
    }
}

}  // namespace

std::vector<std::string> detect_label_columns(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(path.string() + ": cannot open for reading");
    }
    std::string header_line, first_row;
    std::getline(in, header_line);
    std::getline(in, first_row);
    auto cells = [](const std::string& line) {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (true) {
            const auto pos = line.find(',', start);
            std::string c = line.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
            c.erase(0, c.find_first_not_of(" \t\r"));
            c.erase(c.find_last_not_of(" \t\r") + 1);
            out.push_back(c);
            if (pos == std::string::npos) {
                return out;
            }
            start = pos + 1;
        }
    };
    const auto header = cells(header_line);
    const auto row = cells(first_row);
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < header.size(); ++j) {
        const std::string h = lower(header[j]);
        const bool named = h.starts_with("label") || h.starts_with("level") || h.starts_with("class") ||
                           h.starts_with("anchor");
        const bool text = j < row.size() && !looks_numeric(row[j]);
        if (named || text) {
            labels.push_back(header[j]);
        }
    }
    return labels;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"StarMAP: neighbor embedding with PCA-anchored star attraction"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "write the 7500-point hierarchical cluster dataset");
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    std::vector<double> synth_spread{10.0, 2.0, 0.4};
    double synth_noise = 0.08;
    synth->add_option("--seed", synth_seed, "random seed");
    synth->add_option("--out", synth_out, "output CSV")->required();
    synth->add_option("--spread", synth_spread, "ring radii per level (3 values)")->expected(3)->delimiter(',');
    synth->add_option("--noise", synth_noise, "per-point Gaussian noise sd")->check(CLI::NonNegativeNumber);

    // embed
    auto* embed = app.add_subcommand("embed", "embed a CSV dataset");
    EmbedFlags embed_flags;
    std::string embed_input, embed_out, embed_stars_out, embed_label_cols, embed_label;
    embed->add_option("--input", embed_input, "input CSV with a header row")->required();
    embed->add_option("--out", embed_out, "embedding CSV")->required();
    embed->add_option("--stars-out", embed_stars_out, "star CSV (default <out>.stars.csv)");
    embed->add_option("--label-cols", embed_label_cols, "comma-separated non-feature columns (default: detected)");
    embed->add_option("--label", embed_label, "label column copied to the output (default: last label column)");
    embed_flags.attach(embed);

    // eval
    auto* eval = app.add_subcommand("eval", "score an embedding against the original data");
    EmbedFlags eval_flags;
    std::string eval_original, eval_embedding, eval_labels, eval_label_cols;
    std::size_t eval_repeats = 1;
    std::size_t eval_max_pairs = 5'000'000;
    bool eval_json = false, eval_csv = false;
    eval->add_option("--original", eval_original, "original data CSV")->required();
    eval->add_option("--embedding", eval_embedding, "embedding CSV (required unless --repeats > 1)");
    eval->add_option("--labels", eval_labels, "label column for kNN accuracy");
    eval->add_option("--label-cols", eval_label_cols, "comma-separated non-feature columns of the original");
    eval->add_option("--repeats", eval_repeats, "rerun the embedding this many times and report mean and sd")
        ->check(CLI::PositiveNumber);
    eval->add_option("--max-pairs", eval_max_pairs, "pair sample cap for distance correlation")
        ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
    auto* json_flag = eval->add_flag("--json", eval_json, "JSON object on stdout (default)");
    eval->add_flag("--csv", eval_csv, "CSV row on stdout")->excludes(json_flag);
    eval_flags.attach(eval);

    // plot
    auto* plot = app.add_subcommand("plot", "render a 2-D embedding as SVG");
    std::string plot_embedding, plot_stars, plot_color_by, plot_out;
    PlotSpec plot_spec;
    plot->add_option("--embedding", plot_embedding, "embedding CSV")->required();
    plot->add_option("--stars", plot_stars, "star CSV to overlay");
    plot->add_option("--color-by", plot_color_by, "label column used for colors (default: label)");
    plot->add_option("--out", plot_out, "output SVG")->required();
    plot->add_option("--width", plot_spec.width, "pixels")->check(CLI::PositiveNumber);
    plot->add_option("--height", plot_spec.height, "pixels")->check(CLI::PositiveNumber);
    plot->add_option("--radius", plot_spec.point_radius, "point radius in pixels")->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kUsageError;
    }

    try {
        if (synth->parsed()) {
            SynthSpec spec;
            std::copy(synth_spread.begin(), synth_spread.end(), spec.spread.begin());
            spec.noise_sd = synth_noise;
            const auto data = synth_hierarchy(synth_seed, spec);
            save_csv(synth_out, data);
            out << "wrote " << data.X.rows() << " rows to " << synth_out << "\n";
            return kOk;
        }

        if (embed->parsed()) {
            RunConfig cfg;
            try {
                cfg = embed_flags.config();
            } catch (const CLI::ParseError& e) {
                err << "error: " << e.what() << "\n";
                return kUsageError;
            }
            const auto data = load_table(embed_input, embed_label_cols);
            cfg.label_column = embed_label;
            const RunResult res = run(data, cfg);
            const LabelColumn* col = pick_label(data, embed_label);
            if (!embed_label.empty() && col == nullptr) {
                throw InvalidArgument("no label column '" + embed_label + "'");
            }
            std::optional<std::filesystem::path> stars_out;
            if (!embed_stars_out.empty()) {
                stars_out = embed_stars_out;
            }
            save_embedding_csv(embed_out, res.Y, col ? &col->values : nullptr, res.stars ? &*res.stars : nullptr,
                               nullptr, stars_out);
            out << "method=" << to_string(cfg.method) << " N=" << res.Y.rows() << " epochs=" << res.n_epochs;
            if (res.stars) {
                out << " anchors=" << res.n_anchors;
            }
            out << " knn_accuracy=" << text_number(res.report.knn_accuracy)
                << " distance_correlation=" << text_number(res.report.distance_correlation)
                << " elapsed_seconds=" << res.report.elapsed_seconds << "\n";
            return kOk;
        }

        if (eval->parsed()) {
            const auto original = load_table(eval_original, eval_label_cols);
            const std::string dataset = std::filesystem::path(eval_original).stem().string();
            if (eval_repeats > 1) {
                RunConfig cfg;
                try {
                    cfg = eval_flags.config();
                } catch (const CLI::ParseError& e) {
                    err << "error: " << e.what() << "\n";
                    return kUsageError;
                }
                cfg.label_column = eval_labels;
                cfg.max_pairs = eval_max_pairs;
                const auto rows = compare(original, {cfg}, eval_repeats);
                const auto& row = rows.front();
                for (const auto& e : row.errors) {
                    err << "run failed: " << e << "\n";
                }
                if (row.runs.empty()) {
                    return kRuntimeError;
                }
                if (eval_csv) {
                    out << "method,dataset,seed,repeats,knn_accuracy_mean,knn_accuracy_sd,distance_correlation_mean,"
                           "distance_correlation_sd,elapsed_seconds_mean,elapsed_seconds_sd\n";
                    out << to_string(cfg.method) << ',' << dataset << ',' << cfg.seed << ',' << row.runs.size() << ','
                        << csv_number(row.knn_accuracy.mean) << ',' << csv_number(row.knn_accuracy.sd) << ','
                        << csv_number(row.distance_correlation.mean) << ',' << csv_number(row.distance_correlation.sd)
                        << ',' << csv_number(row.elapsed_seconds.mean) << ',' << csv_number(row.elapsed_seconds.sd)
                        << "\n";
                } else {
                    nlohmann::json j;
                    j["knn_accuracy"] = {{"mean", number_or_null(row.knn_accuracy.mean)},
                                         {"sd", number_or_null(row.knn_accuracy.sd)}};
                    j["distance_correlation"] = {{"mean", number_or_null(row.distance_correlation.mean)},
                                                 {"sd", number_or_null(row.distance_correlation.sd)}};
                    j["elapsed_seconds"] = {{"mean", number_or_null(row.elapsed_seconds.mean)},
                                            {"sd", number_or_null(row.elapsed_seconds.sd)}};
                    j["repeats"] = row.runs.size();
                    out << j.dump() << "\n";
                }
                return kOk;
            }

            if (eval_embedding.empty()) {
                err << "error: --embedding is required unless --repeats > 1\n";
                return kUsageError;
            }
            const auto start = std::chrono::steady_clock::now();
            const auto embedding = load_table(eval_embedding, "");
            if (embedding.X.rows() != original.X.rows()) {
                throw InvalidArgument("row count mismatch: original has " + std::to_string(original.X.rows()) +
                                      ", embedding has " + std::to_string(embedding.X.rows()));
            }
            MetricReport report;
            const auto dc = distance_correlation(original.X, embedding.X, eval_max_pairs, eval_flags.seed);
            report.distance_correlation = dc.value;
            report.n_pairs_sampled = dc.pairs;
            const LabelColumn* col = nullptr;
            if (!eval_labels.empty()) {
                col = original.label(eval_labels);
                if (col == nullptr) {
                    col = embedding.label(eval_labels);
                }
                if (col == nullptr) {
                    throw InvalidArgument("no label column '" + eval_labels + "' in either file");
                }
            } else if (const auto* l = embedding.label("label")) {
                col = l;
            } else if (!original.labels.empty()) {
                col = &original.labels.back();
            }
            if (col != nullptr && col->n_classes() >= 2) {
                report.knn_accuracy = knn_accuracy(embedding.X, col->values, 5);
            }
            report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (eval_csv) {
                const std::string method = eval->count("--method") ? eval_flags.method : "embedding";
                out << "method,dataset,seed,knn_accuracy,distance_correlation,elapsed_seconds\n";
                out << method << ',' << dataset << ',' << eval_flags.seed << ',' << csv_number(report.knn_accuracy)
                    << ',' << csv_number(report.distance_correlation) << ',' << format_real(report.elapsed_seconds)
                    << "\n";
            } else {
                nlohmann::json j;
                j["knn_accuracy"] = number_or_null(report.knn_accuracy);
                j["distance_correlation"] = number_or_null(report.distance_correlation);
                j["n_pairs_sampled"] = report.n_pairs_sampled;
                j["elapsed_seconds"] = report.elapsed_seconds;
                out << j.dump() << "\n";
            }
            return kOk;
        }

        if (plot->parsed()) {
            const auto embedding = load_table(plot_embedding, "");
            if (embedding.X.cols() != 2) {
                throw InvalidArgument("plot needs a 2-D embedding, got " + std::to_string(embedding.X.cols()) +
                                      " coordinate columns");
            }
            const LabelColumn* col = nullptr;
            if (!plot_color_by.empty()) {
                col = embedding.label(plot_color_by);
                if (col == nullptr) {
                    throw InvalidArgument("no column '" + plot_color_by + "' in " + plot_embedding);
                }
            } else {
                col = embedding.label("label");
            }
            std::optional<LabeledDataset> stars;
            if (!plot_stars.empty()) {
                stars = load_table(plot_stars, "");
            }
            const std::string svg =
                render_svg(embedding.X, col ? &col->values : nullptr, stars ? &stars->X : nullptr, plot_spec);
            write_text(plot_out, svg);
            out << "wrote " << plot_out << "\n";
            return kOk;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace starmap::cli

#pragma once

#include "loadclust/loadclust.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace loadclust::cli {

enum class Command { ingest, synth, cluster, sweep, elbow };

struct RunConfig {
    Command                    command = Command::cluster;
    std::string                input;
    std::string                output;
    std::vector<Method>        methods{Method::ahc};
    MetricKind                 distance     = MetricKind::dtw;
    Linkage                    linkage      = Linkage::average;
    AverageMode                average_mode = AverageMode::pairwise;
    std::size_t                window       = kDefaultDtwWindow;
    std::size_t                k            = 0;
    std::size_t                k_min        = 2;
    std::size_t                k_max        = 0;
    std::uint64_t              seed         = 0;
    Normalization              normalization = Normalization::per_curve;
    std::string                save_matrix;
    std::string                load_matrix;
    std::string                dendrogram;
    FitOptions                 fit{};
    unsigned                   threads = 0;
    // synth
    std::size_t                k_true        = 3;
    std::size_t                per_archetype = 10;
    double                     noise         = 0.1;
    int                        shift         = 2;

    // Which optional flags were given explicitly.
    bool distance_set      = false;
    bool window_set        = false;
    bool linkage_set       = false;
    bool average_mode_set  = false;
    bool normalization_set = false;
    bool covariance_set    = false;
};

/// Rejects flag combinations that make no sense; throws std::invalid_argument with a one-line message.
inline void validate(const RunConfig& config) {
    const bool has_ahc = std::find(config.methods.begin(), config.methods.end(), Method::ahc) != config.methods.end();
    const bool has_gmm = std::find(config.methods.begin(), config.methods.end(), Method::gmm) != config.methods.end();
    const bool clustering = config.command == Command::cluster || config.command == Command::sweep;

    if (config.window_set && config.distance != MetricKind::dtw) {
        throw std::invalid_argument("--window is only valid with --distance dtw");
    }
    if (config.window < 1 || config.window > kHoursPerDay) {
        throw std::invalid_argument("--window must be in [1, 24]");
    }
    if (clustering) {
        if ((config.linkage_set || config.average_mode_set) && !has_ahc) {
            throw std::invalid_argument("--linkage/--average-mode are only valid with --method ahc");
        }
        if (config.average_mode_set && config.linkage != Linkage::average) {
            throw std::invalid_argument("--average-mode requires --linkage average");
        }
        if (config.covariance_set && !has_gmm) {
            throw std::invalid_argument("--covariance is only valid with --method gmm");
        }
        if (config.distance_set && config.distance != MetricKind::euclidean) {
            for (Method m : config.methods) {
                if (m == Method::kmeans || m == Method::kmeanspp || m == Method::gmm) {
                    throw std::invalid_argument("--method " + std::string(to_string(m)) +
                                                " always uses euclidean distance");
                }
            }
        }
        if (config.normalization == Normalization::raw) {
            throw std::invalid_argument("clustering requires --normalization per-curve or per-hour");
        }
    }
    if (config.command == Command::cluster) {
        if (config.methods.size() != 1) throw std::invalid_argument("cluster takes exactly one --method");
        if (config.k < 2) throw std::invalid_argument("cluster requires --k >= 2");
        if (!config.dendrogram.empty() && !has_ahc) throw std::invalid_argument("--dendrogram requires --method ahc");
    }
    if (config.command == Command::sweep) {
        if (config.k_max < config.k_min || config.k_min < 2) {
            throw std::invalid_argument("sweep requires 2 <= --k-min <= --k-max");
        }
        if (config.methods.size() > 1 && (!config.save_matrix.empty() || !config.load_matrix.empty())) {
            throw std::invalid_argument("--save-matrix/--load-matrix need a single --method");
        }
    }
    if (config.command == Command::synth && (config.k_true == 0 || config.per_archetype == 0)) {
        throw std::invalid_argument("--k-true and --per-archetype must be positive");
    }
}

inline MetricConfig metric_of(const RunConfig& config) {
    return {config.distance, config.distance == MetricKind::dtw ? config.window : 1};
}

inline MethodConfig method_config(const RunConfig& config, Method method) {
    MethodConfig mc;
    mc.method           = method;
    mc.metric           = metric_of(config);
    mc.ahc.linkage      = config.linkage;
    mc.ahc.average_mode = config.average_mode;
    mc.fit              = config.fit;
    mc.fit.seed         = config.seed;
    return mc;
}

/// The resolved configuration, embedded in every artifact.
inline io::Json provenance(const RunConfig& config) {
    static constexpr std::string_view names[] = {"ingest", "synth", "cluster", "sweep", "elbow"};
    io::Json j;
    j["command"] = std::string(names[static_cast<int>(config.command)]);
    j["input"]   = config.input;
    switch (config.command) {
        case Command::synth:
            j["k_true"]        = config.k_true;
            j["per_archetype"] = config.per_archetype;
            j["noise"]         = config.noise;
            j["shift"]         = config.shift;
            j["seed"]          = config.seed;
            break;
        case Command::cluster:
        case Command::sweep: {
            io::Json methods = io::Json::array();
            for (Method m : config.methods) methods.push_back(io::to_json(method_config(config, m)));
            j["methods"]       = methods;
            j["normalization"] = std::string(to_string(config.normalization));
            if (config.command == Command::cluster) {
                j["k"] = config.k;
            } else {
                j["k_min"] = config.k_min;
                j["k_max"] = config.k_max;
            }
            break;
        }
        default: break;
    }
    if (config.normalization_set) j["normalization"] = std::string(to_string(config.normalization));
    return j;
}

namespace detail {

inline Dataset prepare_dataset(const RunConfig& config) {
    auto [dataset, manifest] = io::load_curves(config.input);
    if (dataset.size() < 2) throw std::invalid_argument("need at least 2 curves, got " + std::to_string(dataset.size()));
    if (dataset.normalization == Normalization::raw) {
        return normalize_dataset(dataset, config.normalization);
    }
    if (config.normalization_set && dataset.normalization != config.normalization) {
        throw std::invalid_argument("input is already " + std::string(to_string(dataset.normalization)) +
                                    " normalized; cannot apply " + std::string(to_string(config.normalization)));
    }
    return dataset;
}

/// Loads the cached matrix when asked (checking it fits), else computes it; saves when asked.
inline DistanceMatrix obtain_matrix(const RunConfig& config, const Dataset& dataset) {
    const MetricConfig metric = metric_of(config);
    DistanceMatrix     matrix;
    if (!config.load_matrix.empty()) {
        std::istringstream in(io::read_file(config.load_matrix));
        matrix = io::read_matrix(in, config.load_matrix);
        if (matrix.size() != dataset.size()) {
            throw std::invalid_argument("cached matrix has n = " + std::to_string(matrix.size()) + ", dataset has " +
                                        std::to_string(dataset.size()));
        }
        if (!(matrix.metric() == metric)) throw std::invalid_argument("cached matrix was built with another metric");
    } else {
        PairwiseOptions options;
        options.threads = config.threads;
        matrix          = pairwise_matrix(dataset, metric, options);
    }
    if (!config.save_matrix.empty()) io::write_file(config.save_matrix, io::matrix_text(matrix));
    return matrix;
}

inline void maybe_normalize(const RunConfig& config, Dataset& dataset) {
    if (config.normalization_set && config.normalization != Normalization::raw) {
        dataset = normalize_dataset(dataset, config.normalization);
    }
}

inline int run_ingest(const RunConfig& config, std::ostream& out) {
    std::istringstream in(io::read_file(config.input));
    const auto         readings = io::read_readings_csv(in, config.input);
    auto               reshaped = reshape_readings(readings);
    maybe_normalize(config, reshaped.dataset);
    auto manifest         = io::manifest_for(reshaped.dataset);
    manifest.dropped_days = reshaped.dropped_days;
    manifest.config       = provenance(config);
    io::save_curves(config.output, reshaped.dataset, manifest);
    out << "curves=" << reshaped.dataset.size() << " dropped_days=" << reshaped.dropped_days << '\n';
    return 0;
}

inline int run_synth(const RunConfig& config, std::ostream& out) {
    const auto spec = SyntheticSpec::builtin(config.k_true, config.per_archetype, config.noise, config.shift);
    auto       synthetic = generate_synthetic(spec, config.seed);
    maybe_normalize(config, synthetic.dataset);
    auto manifest   = io::manifest_for(synthetic.dataset);
    manifest.labels = synthetic.labels;
    manifest.config = provenance(config);
    io::save_curves(config.output, synthetic.dataset, manifest);
    out << "curves=" << synthetic.dataset.size() << '\n';
    return 0;
}

inline int run_cluster(const RunConfig& config, std::ostream& out) {
    const Dataset      dataset = prepare_dataset(config);
    const MethodConfig mc      = method_config(config, config.methods.front());
    ClusteringResult   result;
    if (mc.method == Method::ahc || mc.method == Method::kmedoids) {
        const DistanceMatrix matrix = obtain_matrix(config, dataset);
        if (mc.method == Method::ahc) {
            const Dendrogram dendrogram = build_dendrogram(matrix, mc.ahc);
            if (!config.dendrogram.empty()) io::write_file(config.dendrogram, io::dendrogram_csv(dendrogram));
            result = cut(dendrogram, config.k, matrix);
        } else {
            result = fit(dataset, mc, config.k, &matrix);
        }
    } else {
        result = fit(dataset, mc, config.k);
    }
    const double quality = wcbcr(result, dataset);

    io::Json j       = io::to_json(result);
    j["wcbcr"]       = quality;
    j["config"]      = provenance(config);
    io::write_file(config.output, j.dump(2) + '\n');
    out << "wcbcr=" << io::format_double(quality) << '\n';
    return 0;
}

inline int run_sweep(const RunConfig& config, std::ostream& out) {
    const Dataset dataset = prepare_dataset(config);
    if (config.methods.size() == 1) {
        const MethodConfig   mc = method_config(config, config.methods.front());
        std::optional<DistanceMatrix> matrix;
        if (mc.method == Method::ahc || mc.method == Method::kmedoids) matrix = obtain_matrix(config, dataset);
        const SweepReport report = sweep(dataset, mc, config.k_min, config.k_max, matrix ? &*matrix : nullptr);
        std::optional<ElbowResult> knee;
        if (report.rows.size() >= 3) knee = elbow(report);
        io::Json meta  = io::sweep_metadata(report, knee);
        meta["config"] = provenance(config);
        io::write_file(config.output, io::sweep_csv(report.rows));
        io::write_file(config.output + ".json", meta.dump(2) + '\n');
        for (const auto& f : report.failures) out << "failed k=" << f.k << ": " << f.diagnostic << '\n';
        if (knee) out << "elbow_k=" << knee->k << '\n';
        return 0;
    }

    std::vector<MethodConfig> configs;
    for (Method m : config.methods) configs.push_back(method_config(config, m));
    const SweepTable table = sweep_table(dataset, configs, config.k_min, config.k_max);
    io::Json         meta;
    io::Json         columns = io::Json::array();
    for (std::size_t c = 0; c < table.reports.size(); ++c) {
        const auto&                report = table.reports[c];
        std::optional<ElbowResult> knee;
        if (report.rows.size() >= 3) knee = elbow(report);
        io::Json column  = io::sweep_metadata(report, knee);
        column["column"] = table.columns[c];
        columns.push_back(column);
        if (knee) out << table.columns[c] << " elbow_k=" << knee->k << '\n';
    }
    meta["columns"] = columns;
    meta["config"]  = provenance(config);
    io::write_file(config.output, io::sweep_table_csv(table));
    io::write_file(config.output + ".json", meta.dump(2) + '\n');
    return 0;
}

inline int run_elbow(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::istringstream in(io::read_file(config.input));
    const auto         rows = io::read_sweep_csv(in, config.input);
    const auto         knee = elbow(rows);
    if (knee.degenerate) err << "warning: wcbcr curve has no elbow; reporting k_min\n";
    out << knee.k << '\n';
    return 0;
}

}  // namespace detail

inline int execute(const RunConfig& config, std::ostream& out, std::ostream& err) {
    switch (config.command) {
        case Command::ingest: return detail::run_ingest(config, out);
        case Command::synth: return detail::run_synth(config, out);
        case Command::cluster: return detail::run_cluster(config, out);
        case Command::sweep: return detail::run_sweep(config, out);
        case Command::elbow: return detail::run_elbow(config, out, err);
    }
    return 1;
}

/// Parses argv, validates, runs. Returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Shape-based clustering of daily load curves"};
    app.require_subcommand(1);
    RunConfig config;

    std::string methods_text = "ahc", distance_text = "dtw", linkage_text = "average", average_text = "pairwise";
    std::string normalization_text = "per-curve", covariance_text = "diagonal";

    auto* ingest  = app.add_subcommand("ingest", "Raw hourly readings CSV -> daily curves CSV + manifest");
    auto* synth   = app.add_subcommand("synth", "Write a seeded synthetic curves CSV + manifest");
    auto* cluster = app.add_subcommand("cluster", "Cluster curves at one k; writes result JSON");
    auto* sweep_  = app.add_subcommand("sweep", "WCBCR over a k range; writes k,wcbcr CSV + JSON metadata");
    auto* elbow_  = app.add_subcommand("elbow", "Print the elbow k of a sweep CSV");

    for (auto* sub : {ingest, synth, cluster, sweep_, elbow_}) {
        if (sub != synth) {
            sub->add_option("-i,--input", config.input, "Input file")->required()->check(CLI::ExistingFile);
        }
        if (sub != elbow_) {
            sub->add_option("-o,--output", config.output, "Output file")->required();
            sub->add_option("--normalization", normalization_text, "raw | per-curve | per-hour");
        }
    }
    for (auto* sub : {cluster, sweep_}) {
        sub->add_option("--method", methods_text, "ahc | kmeans | kmeanspp | kmedoids | gmm (sweep: comma-separated)");
        sub->add_option("--distance", distance_text, "dtw | euclidean | manhattan | cosine");
        sub->add_option("--window", config.window, "DTW band width");
        sub->add_option("--linkage", linkage_text, "single | complete | average");
        sub->add_option("--average-mode", average_text, "pairwise | size-weighted");
        sub->add_option("--covariance", covariance_text, "diagonal | full");
        sub->add_option("--seed", config.seed, "Random seed");
        sub->add_option("--restarts", config.fit.restarts, "Independent runs per fit");
        sub->add_option("--max-iterations", config.fit.max_iterations, "Iteration cap per run");
        sub->add_option("--tolerance", config.fit.tolerance, "Convergence tolerance");
        sub->add_option("--save-matrix", config.save_matrix, "Write the distance matrix cache");
        sub->add_option("--load-matrix", config.load_matrix, "Read the distance matrix cache")->check(CLI::ExistingFile);
        sub->add_option("--threads", config.threads, "Distance matrix threads (0 = all cores)");
    }
    cluster->add_option("--k", config.k, "Number of clusters")->required();
    cluster->add_option("--dendrogram", config.dendrogram, "Write the AHC merge table CSV");
    sweep_->add_option("--k-min", config.k_min, "Smallest k");
    sweep_->add_option("--k-max", config.k_max, "Largest k")->required();
    synth->add_option("--seed", config.seed, "Random seed");
    synth->add_option("--k-true", config.k_true, "Number of archetypes (1-6)");
    synth->add_option("--per-archetype", config.per_archetype, "Curves per archetype");
    synth->add_option("--noise", config.noise, "Gaussian noise std (kWh)");
    synth->add_option("--shift", config.shift, "Max circular shift (hours)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        const auto* chosen = app.get_subcommands().front();
        const std::string name = chosen->get_name();
        config.command = name == "ingest" ? Command::ingest
                         : name == "synth" ? Command::synth
                         : name == "cluster" ? Command::cluster
                         : name == "sweep" ? Command::sweep
                                           : Command::elbow;

        auto given = [&](const char* flag) {
            const auto* opt = chosen->get_option_no_throw(flag);
            return opt != nullptr && opt->count() > 0;
        };
        config.methods.clear();
        for (const auto field : io::split_csv(methods_text)) {
            const auto method = parse_method(field);
            if (!method) throw std::invalid_argument("unknown --method '" + std::string(field) + "'");
            config.methods.push_back(*method);
        }
        const auto distance = parse_metric_kind(distance_text);
        if (!distance) throw std::invalid_argument("unknown --distance '" + distance_text + "'");
        config.distance     = *distance;
        const auto linkage  = parse_linkage(linkage_text);
        if (!linkage) throw std::invalid_argument("unknown --linkage '" + linkage_text + "'");
        config.linkage          = *linkage;
        const auto average_mode = parse_average_mode(average_text);
        if (!average_mode) throw std::invalid_argument("unknown --average-mode '" + average_text + "'");
        config.average_mode      = *average_mode;
        const auto normalization = parse_normalization(normalization_text);
        if (!normalization) throw std::invalid_argument("unknown --normalization '" + normalization_text + "'");
        config.normalization = *normalization;
        if (covariance_text != "diagonal" && covariance_text != "full") {
            throw std::invalid_argument("unknown --covariance '" + covariance_text + "'");
        }
        config.fit.covariance_kind = covariance_text == "full" ? CovarianceKind::full : CovarianceKind::diagonal;

        config.distance_set      = given("--distance");
        config.window_set        = given("--window");
        config.linkage_set       = given("--linkage");
        config.average_mode_set  = given("--average-mode");
        config.normalization_set = given("--normalization");
        config.covariance_set    = given("--covariance");
        validate(config);
        return execute(config, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace loadclust::cli

#pragma once

#include "loadclust/ahc.hpp"
#include "loadclust/curves.hpp"
#include "loadclust/distance.hpp"
#include "loadclust/partitional.hpp"
#include "loadclust/result.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace loadclust {

/// Everything needed to reproduce one clustering configuration, minus k.
struct MethodConfig {
    Method       method = Method::ahc;
    MetricConfig metric{};  ///< used by ahc and kmedoids
    AhcOptions   ahc{};
    FitOptions   fit{};     ///< fit.k is overwritten per run
};

/// Column label in sweep tables, e.g. "kmeans" or "ahc_dtw_average".
inline std::string method_label(const MethodConfig& config) {
    std::string label(to_string(config.method));
    if (config.method == Method::ahc) {
        label += "_" + std::string(to_string(config.metric.kind)) + "_" + std::string(to_string(config.ahc.linkage));
    } else if (config.method == Method::kmedoids && config.metric.kind != MetricKind::dtw) {
        label += "_" + std::string(to_string(config.metric.kind));
    }
    return label;
}

/// Representative curve of every cluster. Medoid results resolve to member
/// curves; AHC cuts without medoids get them computed under the result's metric.
inline std::vector<CurveValues> prototypes(const ClusteringResult& result, const Dataset& dataset) {
    validate(result, dataset.size(), false);
    if (const auto* vectors = std::get_if<VectorPrototypes>(&result.prototypes)) {
        if (vectors->size() != result.k) throw std::invalid_argument("prototypes: prototype count differs from k");
        return *vectors;
    }
    const auto&              medoids = std::get<MedoidPrototypes>(result.prototypes);
    std::vector<CurveValues> out;
    if (!medoids.empty()) {
        if (medoids.size() != result.k) throw std::invalid_argument("prototypes: prototype count differs from k");
        for (std::size_t m : medoids) out.push_back(dataset.values(m));
        return out;
    }
    if (!result.method.metric) {
        throw std::invalid_argument("prototypes: medoids unresolved and no metric recorded");
    }
    const MetricConfig metric = *result.method.metric;
    DtwWorkspace       ws(kHoursPerDay);
    for (const auto& members : cluster_members(result.assignments, result.k)) {
        std::size_t best     = members.front();
        double      best_sum = std::numeric_limits<double>::infinity();
        for (std::size_t candidate : members) {
            double sum = 0.0;
            for (std::size_t other : members) {
                if (other != candidate) sum += distance(dataset.values(candidate), dataset.values(other), metric, ws);
            }
            if (sum < best_sum) {
                best_sum = sum;
                best     = candidate;
            }
        }
        out.push_back(dataset.values(best));
    }
    return out;
}

/// Within-cluster to between-cluster distance ratio, always under Euclidean
/// distance. The denominator counts each unordered prototype pair once.
inline double wcbcr(const ClusteringResult& result, const Dataset& dataset) {
    if (result.k < 2) {
        throw std::invalid_argument("wcbcr: k must be >= 2");
    }
    const auto protos = prototypes(result, dataset);
    double     within = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        within += euclidean(dataset.values(i), protos[result.assignments[i]]);
    }
    double between = 0.0;
    for (std::size_t a = 0; a < protos.size(); ++a) {
        for (std::size_t b = a + 1; b < protos.size(); ++b) {
            between += euclidean(protos[a], protos[b]);
        }
    }
    if (between == 0.0) {
        throw DegenerateClustering("wcbcr: all prototypes coincide");
    }
    return within / between;
}

/// Runs one configured method at a given k, reusing a precomputed matrix when one is given.
inline ClusteringResult fit(const Dataset& dataset, const MethodConfig& config, std::size_t k,
                            const DistanceMatrix* matrix = nullptr) {
    FitOptions options = config.fit;
    options.k          = k;
    switch (config.method) {
        case Method::ahc: {
            const DistanceMatrix computed = matrix ? DistanceMatrix{} : pairwise_matrix(dataset, config.metric);
            const DistanceMatrix& m       = matrix ? *matrix : computed;
            return cut(build_dendrogram(m, config.ahc), k, m);
        }
        case Method::kmeans: return kmeans(dataset, options, KMeansInit::random);
        case Method::kmeanspp: return kmeans(dataset, options, KMeansInit::plusplus);
        case Method::kmedoids:
            if (matrix) return kmedoids(*matrix, options);
            return kmedoids(dataset, options, config.metric);
        case Method::gmm: return gmm_em(dataset, options);
    }
    throw std::invalid_argument("fit: unknown method");
}

struct SweepRow {
    std::size_t k     = 0;
    double      wcbcr = 0.0;

    bool operator==(const SweepRow&) const = default;
};

struct SweepFailure {
    std::size_t k = 0;
    std::string diagnostic;
};

struct SweepReport {
    MethodConfig              config;
    std::vector<SweepRow>     rows;      ///< strictly increasing k; failed ks are absent
    std::vector<SweepFailure> failures;
    std::string               evaluation_metric = "euclidean";
    std::size_t               dendrogram_builds = 0;
};

/// WCBCR for every k in [k_min, k_max]. AHC builds one dendrogram and cuts it
/// at each k; partitional methods refit per k with the same seed.
inline SweepReport sweep(const Dataset& dataset, const MethodConfig& config, std::size_t k_min, std::size_t k_max,
                         const DistanceMatrix* matrix = nullptr) {
    if (k_min < 2 || k_min > k_max || k_max > dataset.size()) {
        throw std::invalid_argument("sweep: need 2 <= k_min <= k_max <= " + std::to_string(dataset.size()));
    }
    SweepReport report;
    report.config = config;

    const bool needs_matrix = config.method == Method::ahc || config.method == Method::kmedoids;
    std::optional<DistanceMatrix> owned;
    if (needs_matrix && !matrix) {
        owned  = pairwise_matrix(dataset, config.metric);
        matrix = &*owned;
    }
    std::optional<Dendrogram> dendrogram;
    if (config.method == Method::ahc) {
        dendrogram = build_dendrogram(*matrix, config.ahc);
        ++report.dendrogram_builds;
    }

    for (std::size_t k = k_min; k <= k_max; ++k) {
        try {
            const ClusteringResult result =
                dendrogram ? cut(*dendrogram, k, *matrix) : fit(dataset, config, k, matrix);
            report.rows.push_back({k, wcbcr(result, dataset)});
        } catch (const std::exception& e) {
            report.failures.push_back({k, e.what()});
        }
    }
    return report;
}

struct ElbowResult {
    std::size_t k          = 0;
    /// No interior point deviates from the chord; k is then the first row's k.
    bool        degenerate = false;
};

inline constexpr double kElbowFlatTolerance = 1e-12;

/// Knee of the wcbcr-vs-k curve: both axes min-max scaled to [0, 1], then the
/// interior row farthest from the chord between the first and last rows.
inline ElbowResult elbow(const std::vector<SweepRow>& rows) {
    if (rows.size() < 3) {
        throw std::invalid_argument("elbow: need at least 3 rows");
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].k <= rows[i - 1].k) throw std::invalid_argument("elbow: rows must have strictly increasing k");
    }
    double lo = rows.front().wcbcr, hi = rows.front().wcbcr;
    for (const auto& row : rows) {
        lo = std::min(lo, row.wcbcr);
        hi = std::max(hi, row.wcbcr);
    }
    const double k_lo = static_cast<double>(rows.front().k);
    const double k_span = static_cast<double>(rows.back().k) - k_lo;
    if (hi - lo <= 0.0) {
        return {rows.front().k, true};
    }

    auto point = [&](const SweepRow& row) {
        return std::pair{(static_cast<double>(row.k) - k_lo) / k_span, (row.wcbcr - lo) / (hi - lo)};
    };
    const auto [x0, y0] = point(rows.front());
    const auto [x1, y1] = point(rows.back());
    const double dx = x1 - x0, dy = y1 - y0;
    const double chord = std::hypot(dx, dy);

    ElbowResult best{rows.front().k, true};
    double      best_distance = kElbowFlatTolerance;
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        const auto [x, y]  = point(rows[i]);
        const double dist = std::abs(dy * (x - x0) - dx * (y - y0)) / chord;
        if (dist > best_distance) {
            best_distance = dist;
            best          = {rows[i].k, false};
        }
    }
    return best;
}

inline ElbowResult elbow(const SweepReport& report) { return elbow(report.rows); }

/// One wcbcr column per method over a shared k range, in the order given.
struct SweepTable {
    std::vector<std::string>                      columns;
    std::vector<std::size_t>                      ks;
    std::vector<std::vector<std::optional<double>>> cells;  ///< cells[row][column]
    std::vector<SweepReport>                      reports;
};

inline SweepTable sweep_table(const Dataset& dataset, const std::vector<MethodConfig>& configs, std::size_t k_min,
                              std::size_t k_max) {
    SweepTable table;
    for (std::size_t k = k_min; k <= k_max; ++k) table.ks.push_back(k);
    table.cells.assign(table.ks.size(), std::vector<std::optional<double>>(configs.size()));
    for (std::size_t c = 0; c < configs.size(); ++c) {
        table.columns.push_back(method_label(configs[c]));
        table.reports.push_back(sweep(dataset, configs[c], k_min, k_max));
        for (const auto& row : table.reports.back().rows) {
            table.cells[row.k - k_min][c] = row.wcbcr;
        }
    }
    return table;
}

}  // namespace loadclust

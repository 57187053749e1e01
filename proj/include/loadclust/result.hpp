#pragma once

#include "loadclust/core.hpp"
#include "loadclust/distance.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace loadclust {

enum class Method { ahc, kmeans, kmeanspp, kmedoids, gmm };

inline std::string_view to_string(Method method) {
    switch (method) {
        case Method::ahc: return "ahc";
        case Method::kmeans: return "kmeans";
        case Method::kmeanspp: return "kmeanspp";
        case Method::kmedoids: return "kmedoids";
        case Method::gmm: return "gmm";
    }
    return "ahc";
}

inline std::optional<Method> parse_method(std::string_view text) {
    if (text == "ahc") return Method::ahc;
    if (text == "kmeans") return Method::kmeans;
    if (text == "kmeanspp") return Method::kmeanspp;
    if (text == "kmedoids") return Method::kmedoids;
    if (text == "gmm") return Method::gmm;
    return std::nullopt;
}

enum class Linkage { single, complete, average };

inline std::string_view to_string(Linkage linkage) {
    switch (linkage) {
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
    }
    return "average";
}

inline std::optional<Linkage> parse_linkage(std::string_view text) {
    if (text == "single") return Linkage::single;
    if (text == "complete") return Linkage::complete;
    if (text == "average") return Linkage::average;
    return std::nullopt;
}

/// How average linkage combines the two merged clusters' distances.
/// `pairwise` is the plain mean of the two; `size_weighted` weights by cluster size.
enum class AverageMode { pairwise, size_weighted };

inline std::string_view to_string(AverageMode mode) {
    return mode == AverageMode::pairwise ? "pairwise" : "size-weighted";
}

inline std::optional<AverageMode> parse_average_mode(std::string_view text) {
    if (text == "pairwise") return AverageMode::pairwise;
    if (text == "size-weighted") return AverageMode::size_weighted;
    return std::nullopt;
}

struct MethodDescriptor {
    Method                      method = Method::ahc;
    std::optional<MetricConfig> metric;
    std::optional<Linkage>      linkage;
    std::optional<AverageMode>  average_mode;
    std::uint64_t               seed       = 0;
    std::size_t                 iterations = 0;
    bool                        converged  = true;
};

/// Dataset indices of medoid curves, one per cluster.
using MedoidPrototypes = std::vector<std::size_t>;
/// Explicit centroid / component-mean vectors, one per cluster.
using VectorPrototypes = std::vector<CurveValues>;

struct ClusteringResult {
    std::vector<std::size_t>                          assignments;
    std::size_t                                       k = 0;
    std::variant<MedoidPrototypes, VectorPrototypes> prototypes;
    MethodDescriptor                                  method;
    /// Method-specific: SSE (kmeans), total medoid distance (kmedoids, ahc), mean log-likelihood (gmm).
    double                                            objective = 0.0;

    [[nodiscard]] bool has_medoids() const { return std::holds_alternative<MedoidPrototypes>(prototypes); }

    [[nodiscard]] std::size_t prototype_count() const {
        return std::visit([](const auto& p) { return p.size(); }, prototypes);
    }
};

/// Throws std::invalid_argument unless labels are in range, every cluster is
/// non-empty and (when `require_prototypes`) there are exactly k prototypes.
inline void validate(const ClusteringResult& result, std::size_t dataset_size, bool require_prototypes = true) {
    if (result.assignments.size() != dataset_size) {
        throw std::invalid_argument("ClusteringResult: " + std::to_string(result.assignments.size()) +
                                    " assignments for " + std::to_string(dataset_size) + " curves");
    }
    if (result.k == 0) {
        throw std::invalid_argument("ClusteringResult: k must be positive");
    }
    std::vector<std::size_t> counts(result.k, 0);
    for (std::size_t label : result.assignments) {
        if (label >= result.k) {
            throw std::invalid_argument("ClusteringResult: label out of range");
        }
        ++counts[label];
    }
    for (std::size_t c = 0; c < result.k; ++c) {
        if (counts[c] == 0) {
            throw std::invalid_argument("ClusteringResult: cluster " + std::to_string(c) + " is empty");
        }
    }
    if (require_prototypes && result.prototype_count() != result.k) {
        throw std::invalid_argument("ClusteringResult: prototype count differs from k");
    }
    if (const auto* medoids = std::get_if<MedoidPrototypes>(&result.prototypes)) {
        for (std::size_t m : *medoids) {
            if (m >= dataset_size) {
                throw std::invalid_argument("ClusteringResult: medoid index out of range");
            }
        }
    }
}

/// Members of each cluster in ascending index order.
inline std::vector<std::vector<std::size_t>> cluster_members(const std::vector<std::size_t>& assignments,
                                                             std::size_t                     k) {
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        members.at(assignments[i]).push_back(i);
    }
    return members;
}

/// Member minimizing the sum of distances to its co-members; ties go to the lowest index.
inline std::size_t medoid_of(const std::vector<std::size_t>& members, const DistanceMatrix& matrix) {
    if (members.empty()) {
        throw std::invalid_argument("medoid_of: empty cluster");
    }
    std::size_t best     = members.front();
    double      best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t candidate : members) {
        double sum = 0.0;
        for (std::size_t other : members) {
            sum += matrix(candidate, other);
        }
        if (sum < best_sum) {
            best_sum = sum;
            best     = candidate;
        }
    }
    return best;
}

}  // namespace loadclust

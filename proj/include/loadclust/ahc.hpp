#pragma once

#include "loadclust/distance.hpp"
#include "loadclust/result.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace loadclust {

struct MergeStep {
    std::size_t left     = 0;  ///< smaller cluster id
    std::size_t right    = 0;  ///< larger cluster id
    double      height   = 0.0;
    std::size_t new_size = 0;

    bool operator==(const MergeStep&) const = default;
};

/// Leaves are ids 0..n-1; merge i creates cluster id n + i.
struct Dendrogram {
    std::size_t            n_leaves = 0;
    std::vector<MergeStep> merges;
    Linkage                linkage      = Linkage::average;
    AverageMode            average_mode = AverageMode::pairwise;
    MetricConfig           metric{};
};

struct AhcOptions {
    Linkage     linkage      = Linkage::average;
    AverageMode average_mode = AverageMode::pairwise;
};

namespace detail {

/// Distance between merged cluster (a ∪ b) and another cluster under the linkage rule.
inline double linkage_update(Linkage linkage, AverageMode mode, double d_a, double d_b, std::size_t size_a,
                             std::size_t size_b) {
    switch (linkage) {
        case Linkage::single: return std::min(d_a, d_b);
        case Linkage::complete: return std::max(d_a, d_b);
        case Linkage::average:
            if (mode == AverageMode::pairwise) {
                return (d_a + d_b) * 0.5;
            }
            return (static_cast<double>(size_a) * d_a + static_cast<double>(size_b) * d_b) /
                   static_cast<double>(size_a + size_b);
    }
    return d_a;
}

}  // namespace detail

/// Agglomerative clustering over a precomputed matrix. At every step the
/// closest pair of active clusters merges; equal distances resolve to the
/// lexicographically smallest (min id, max id) pair. A cached nearest neighbour
/// per cluster avoids rescanning the whole active set each step.
inline Dendrogram build_dendrogram(const DistanceMatrix& matrix, const AhcOptions& options = {}) {
    const std::size_t n = matrix.size();
    if (n < 2) {
        throw std::invalid_argument("build_dendrogram: need at least 2 points");
    }
    for (double d : matrix.entries()) {
        if (!std::isfinite(d)) {
            throw std::invalid_argument("build_dendrogram: non-finite distance");
        }
    }

    // Working copy indexed by slot; a merged cluster reuses the slot of one of its parts.
    DistanceMatrix           work = matrix;
    std::vector<std::size_t> id(n), size(n, 1);
    std::vector<bool>        active(n, true);
    std::vector<std::size_t> nn(n, n);
    std::vector<double>      nn_dist(n, std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < n; ++s) id[s] = s;

    auto key = [&](std::size_t a, std::size_t b, double d) {
        return std::make_tuple(d, std::min(id[a], id[b]), std::max(id[a], id[b]));
    };
    auto better = [&](std::size_t a, std::size_t candidate, std::size_t current) {
        if (current == n) return true;
        return key(a, candidate, work(a, candidate)) < key(a, current, nn_dist[a]);
    };
    auto rescan = [&](std::size_t a) {
        nn[a]      = n;
        nn_dist[a] = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < n; ++b) {
            if (b == a || !active[b]) continue;
            if (better(a, b, nn[a])) {
                nn[a]      = b;
                nn_dist[a] = work(a, b);
            }
        }
    };
    for (std::size_t a = 0; a < n; ++a) rescan(a);

    Dendrogram dendrogram;
    dendrogram.n_leaves     = n;
    dendrogram.linkage      = options.linkage;
    dendrogram.average_mode = options.average_mode;
    dendrogram.metric       = matrix.metric();
    dendrogram.merges.reserve(n - 1);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t a = n;
        for (std::size_t s = 0; s < n; ++s) {
            if (!active[s] || nn[s] == n) continue;
            if (a == n || key(s, nn[s], nn_dist[s]) < key(a, nn[a], nn_dist[a])) a = s;
        }
        const std::size_t b = nn[a];

        MergeStep merge;
        merge.left     = std::min(id[a], id[b]);
        merge.right    = std::max(id[a], id[b]);
        merge.height   = nn_dist[a];
        merge.new_size = size[a] + size[b];
        dendrogram.merges.push_back(merge);

        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a || k == b) continue;
            work.set(a, k,
                     detail::linkage_update(options.linkage, options.average_mode, work(a, k), work(b, k), size[a],
                                            size[b]));
        }
        active[b] = false;
        id[a]     = n + step;
        size[a]   = merge.new_size;

        rescan(a);
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a) continue;
            if (nn[k] == a || nn[k] == b) {
                rescan(k);
            } else if (better(k, a, nn[k])) {
                nn[k]      = a;
                nn_dist[k] = work(k, a);
            }
        }
    }
    return dendrogram;
}

namespace detail {

/// Flat labels after applying the first n - k merges, relabelled 0..k-1 by first appearance.
inline std::vector<std::size_t> cut_labels(const Dendrogram& dendrogram, std::size_t k) {
    const std::size_t n = dendrogram.n_leaves;
    if (k < 1 || k > n) {
        throw std::invalid_argument("cut: k must be in [1, " + std::to_string(n) + "], got " + std::to_string(k));
    }
    if (dendrogram.merges.size() + 1 != n) {
        throw std::invalid_argument("cut: dendrogram must hold n_leaves - 1 merges");
    }
    std::vector<std::size_t> parent(2 * n - 1);
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    for (std::size_t step = 0; step < n - k; ++step) {
        const auto& merge    = dendrogram.merges[step];
        parent[merge.left]   = n + step;
        parent[merge.right]  = n + step;
    }
    auto root = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x];
        return x;
    };

    std::vector<std::size_t> labels(n);
    std::vector<std::size_t> label_of_root(2 * n - 1, n);
    std::size_t              next = 0;
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
        const std::size_t r = root(leaf);
        if (label_of_root[r] == n) label_of_root[r] = next++;
        labels[leaf] = label_of_root[r];
    }
    return labels;
}

}  // namespace detail

/// Flat clustering with k clusters. Prototypes are left empty: medoids need the
/// distance matrix, see the overload below or evaluation's prototypes().
inline ClusteringResult cut(const Dendrogram& dendrogram, std::size_t k) {
    ClusteringResult result;
    result.assignments         = detail::cut_labels(dendrogram, k);
    result.k                   = k;
    result.prototypes          = MedoidPrototypes{};
    result.method.method       = Method::ahc;
    result.method.metric       = dendrogram.metric;
    result.method.linkage      = dendrogram.linkage;
    result.method.average_mode = dendrogram.average_mode;
    result.method.iterations   = dendrogram.merges.size();
    result.method.converged    = true;
    return result;
}

/// Flat clustering with medoid prototypes and total member-to-medoid distance as objective.
inline ClusteringResult cut(const Dendrogram& dendrogram, std::size_t k, const DistanceMatrix& matrix) {
    if (matrix.size() != dendrogram.n_leaves) {
        throw std::invalid_argument("cut: matrix size differs from dendrogram");
    }
    ClusteringResult result = cut(dendrogram, k);
    const auto       groups = cluster_members(result.assignments, k);
    MedoidPrototypes medoids;
    double           cost = 0.0;
    for (const auto& members : groups) {
        const std::size_t m = medoid_of(members, matrix);
        medoids.push_back(m);
        for (std::size_t i : members) cost += matrix(i, m);
    }
    result.prototypes = std::move(medoids);
    result.objective  = cost;
    return result;
}

}  // namespace loadclust

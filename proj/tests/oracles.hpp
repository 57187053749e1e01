#pragma once

// Independent reference computations used to check the library. Nothing here
// calls into the implementation paths being tested.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

/// Minimum over every monotone warping path (steps right, down, diagonal)
/// inside the band |i - j| <= window - 1 of sqrt(sum of squared differences).
inline double exhaustive_dtw(const std::vector<double>& x, const std::vector<double>& y, std::size_t window) {
    const std::size_t n    = x.size();
    const std::size_t m    = y.size();
    const auto        band = static_cast<long>(window) - 1;
    double            best = std::numeric_limits<double>::infinity();

    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double cost) {
        if (std::labs(static_cast<long>(i) - static_cast<long>(j)) > band) return;
        cost += (x[i] - y[j]) * (x[i] - y[j]);
        if (i == n - 1 && j == m - 1) {
            best = std::min(best, cost);
            return;
        }
        if (i + 1 < n) walk(i + 1, j, cost);
        if (j + 1 < m) walk(i, j + 1, cost);
        if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, cost);
    };
    walk(0, 0, 0.0);
    return std::sqrt(best);
}

/// Square symmetric matrix with zero diagonal.
using Square = std::vector<std::vector<double>>;

struct Merge {
    std::size_t left, right;
    double      height;
    std::size_t size;
};

enum class Rule { single, complete, average_pairwise, average_size_weighted };

/// Agglomerative clustering that recomputes each inter-cluster distance from
/// the original matrix at every step: min/max/mean over member pairs, or for the
/// pairwise average, the recursive mean over the later-formed cluster's two parts.
inline std::vector<Merge> from_scratch_linkage(const Square& d, Rule rule) {
    const std::size_t n = d.size();
    struct Cluster {
        std::vector<std::size_t> members;
        std::size_t              left = 0, right = 0;
        bool                     leaf = true;
    };
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters.push_back({{i}, 0, 0, true});

    std::function<double(std::size_t, std::size_t)> dist = [&](std::size_t a, std::size_t b) -> double {
        const auto& A = clusters[a];
        const auto& B = clusters[b];
        switch (rule) {
            case Rule::single: {
                double v = std::numeric_limits<double>::infinity();
                for (auto i : A.members)
                    for (auto j : B.members) v = std::min(v, d[i][j]);
                return v;
            }
            case Rule::complete: {
                double v = 0.0;
                for (auto i : A.members)
                    for (auto j : B.members) v = std::max(v, d[i][j]);
                return v;
            }
            case Rule::average_size_weighted: {
                double v = 0.0;
                for (auto i : A.members)
                    for (auto j : B.members) v += d[i][j];
                return v / static_cast<double>(A.members.size() * B.members.size());
            }
            case Rule::average_pairwise: {
                if (A.leaf && B.leaf) return d[A.members[0]][B.members[0]];
                if (a > b) return (dist(A.left, b) + dist(A.right, b)) * 0.5;
                return (dist(a, B.left) + dist(a, B.right)) * 0.5;
            }
        }
        return 0.0;
    };

    std::vector<bool>  active(n, true);
    std::vector<Merge> merges;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        double      best = std::numeric_limits<double>::infinity();
        std::size_t ba = 0, bb = 0;
        bool        found = false;
        for (std::size_t a = 0; a < clusters.size(); ++a) {
            if (!active[a]) continue;
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                if (!active[b]) continue;
                const double v = dist(a, b);
                // Pairs are visited in (a, b) lexicographic order, so strict < keeps the smallest pair on ties.
                if (!found || v < best) {
                    best  = v;
                    ba    = a;
                    bb    = b;
                    found = true;
                }
            }
        }
        Cluster merged;
        merged.leaf    = false;
        merged.left    = ba;
        merged.right   = bb;
        merged.members = clusters[ba].members;
        merged.members.insert(merged.members.end(), clusters[bb].members.begin(), clusters[bb].members.end());
        merges.push_back({ba, bb, best, merged.members.size()});
        active[ba] = active[bb] = false;
        clusters.push_back(merged);
        active.push_back(true);
    }
    return merges;
}

/// Sorted edge weights of a minimum spanning tree (Prim).
inline std::vector<double> mst_weights(const Square& d) {
    const std::size_t   n = d.size();
    std::vector<bool>   in_tree(n, false);
    std::vector<double> key(n, std::numeric_limits<double>::infinity());
    std::vector<double> weights;
    key[0] = 0.0;
    for (std::size_t it = 0; it < n; ++it) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (!in_tree[v] && (u == n || key[v] < key[u])) u = v;
        }
        in_tree[u] = true;
        if (it > 0) weights.push_back(key[u]);
        for (std::size_t v = 0; v < n; ++v) {
            if (!in_tree[v]) key[v] = std::min(key[v], d[u][v]);
        }
    }
    std::sort(weights.begin(), weights.end());
    return weights;
}

/// Fraction of points whose predicted label maps to their true label under the
/// best one-to-one relabelling (exhaustive over permutations; k <= 8).
inline double best_match_accuracy(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted) {
    std::size_t k = 0;
    for (auto l : truth) k = std::max(k, l + 1);
    for (auto l : predicted) k = std::max(k, l + 1);
    std::vector<std::vector<std::size_t>> overlap(k, std::vector<std::size_t>(k, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) ++overlap[predicted[i]][truth[i]];
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t hits = 0;
        for (std::size_t p = 0; p < k; ++p) hits += overlap[p][perm[p]];
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(truth.size());
}

}  // namespace oracle

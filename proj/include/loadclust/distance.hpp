#pragma once

#include "loadclust/core.hpp"
#include "loadclust/curves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace loadclust {

enum class MetricKind { dtw, euclidean, manhattan, cosine };

inline std::string_view to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::dtw: return "dtw";
        case MetricKind::euclidean: return "euclidean";
        case MetricKind::manhattan: return "manhattan";
        case MetricKind::cosine: return "cosine";
    }
    return "dtw";
}

inline std::optional<MetricKind> parse_metric_kind(std::string_view text) {
    if (text == "dtw") return MetricKind::dtw;
    if (text == "euclidean") return MetricKind::euclidean;
    if (text == "manhattan") return MetricKind::manhattan;
    if (text == "cosine") return MetricKind::cosine;
    return std::nullopt;
}

inline constexpr std::size_t kDefaultDtwWindow = 4;

struct MetricConfig {
    MetricKind  kind   = MetricKind::dtw;
    /// Sakoe-Chiba band width; only read when kind == dtw.
    std::size_t window = kDefaultDtwWindow;

    bool operator==(const MetricConfig&) const = default;

    void validate() const {
        if (window < 1 || window > kHoursPerDay) {
            throw std::invalid_argument("MetricConfig: window must be in [1, 24], got " + std::to_string(window));
        }
    }
};

// ---------------------------------------------------------------------------
// Kernels

/// Scratch rows for the DTW recurrence. Reusing one per thread keeps the kernel allocation-free.
class DtwWorkspace {
public:
    DtwWorkspace() = default;
    explicit DtwWorkspace(std::size_t columns) { reserve(columns); }

    void reserve(std::size_t columns) {
        if (previous_.size() < columns + 1) {
            previous_.resize(columns + 1);
            current_.resize(columns + 1);
        }
    }

private:
    friend double dtw(std::span<const double>, std::span<const double>, std::size_t, DtwWorkspace&);
    std::vector<double> previous_;
    std::vector<double> current_;
};

namespace detail {

inline void require_finite(std::span<const double> values, const char* who) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(who) + ": non-finite input");
        }
    }
}

}  // namespace detail

/// Banded DTW: sqrt of the minimum accumulated squared difference over monotone
/// warping paths with |i - j| <= window - 1. window == 1 is the Euclidean distance.
/// Only two DP rows are held at a time.
inline double dtw(std::span<const double> x, std::span<const double> y, std::size_t window, DtwWorkspace& ws) {
    if (x.empty() || y.empty()) {
        throw std::invalid_argument("dtw: empty sequence");
    }
    if (window < 1) {
        throw std::invalid_argument("dtw: window must be >= 1");
    }
    detail::require_finite(x, "dtw");
    detail::require_finite(y, "dtw");
    const std::size_t n    = x.size();
    const std::size_t m    = y.size();
    const std::size_t band = window - 1;
    if ((n > m ? n - m : m - n) > band) {
        throw std::invalid_argument("dtw: window too narrow for sequence lengths " + std::to_string(n) + " and " +
                                    std::to_string(m));
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    ws.reserve(m);
    double* prev = ws.previous_.data();
    double* curr = ws.current_.data();
    std::fill(prev, prev + m + 1, inf);
    prev[0] = 0.0;

    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(curr, curr + m + 1, inf);
        const std::size_t j_lo = i > band ? i - band : 1;
        const std::size_t j_hi = std::min(m, i + band);
        const double      xi   = x[i - 1];
        for (std::size_t j = j_lo; j <= j_hi; ++j) {
            const double diff = xi - y[j - 1];
            const double best = std::min({prev[j - 1], prev[j], curr[j - 1]});
            curr[j]           = diff * diff + best;
        }
        std::swap(prev, curr);
    }
    return std::sqrt(prev[m]);
}

inline double dtw(std::span<const double> x, std::span<const double> y, std::size_t window) {
    DtwWorkspace ws(y.size());
    return dtw(x, y, window, ws);
}

inline constexpr double kCosineNormFloor = 1e-12;

/// Euclidean, Manhattan, or cosine distance between equal-length vectors.
/// Cosine distance is 1 when either vector has norm below 1e-12.
inline double pointwise_distance(std::span<const double> x, std::span<const double> y, MetricKind kind) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("pointwise_distance: length mismatch");
    }
    detail::require_finite(x, "pointwise_distance");
    detail::require_finite(y, "pointwise_distance");
    switch (kind) {
        case MetricKind::euclidean: {
            double acc = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - y[i];
                acc            = d * d + acc;
            }
            return std::sqrt(acc);
        }
        case MetricKind::manhattan: {
            double acc = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                acc += std::abs(x[i] - y[i]);
            }
            return acc;
        }
        case MetricKind::cosine: {
            double dot = 0.0, xx = 0.0, yy = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                dot += x[i] * y[i];
                xx += x[i] * x[i];
                yy += y[i] * y[i];
            }
            const double nx = std::sqrt(xx);
            const double ny = std::sqrt(yy);
            if (nx < kCosineNormFloor || ny < kCosineNormFloor) {
                return 1.0;
            }
            return std::clamp(1.0 - dot / (nx * ny), 0.0, 2.0);
        }
        case MetricKind::dtw:
            break;
    }
    throw std::invalid_argument("pointwise_distance: dtw is not a pointwise metric");
}

inline double euclidean(std::span<const double> x, std::span<const double> y) {
    return pointwise_distance(x, y, MetricKind::euclidean);
}

/// Distance under `metric`; `ws` is only touched for DTW.
inline double distance(std::span<const double> x, std::span<const double> y, const MetricConfig& metric,
                       DtwWorkspace& ws) {
    if (metric.kind == MetricKind::dtw) {
        return dtw(x, y, metric.window, ws);
    }
    return pointwise_distance(x, y, metric.kind);
}

inline double distance(std::span<const double> x, std::span<const double> y, const MetricConfig& metric) {
    DtwWorkspace ws;
    return distance(x, y, metric, ws);
}

// ---------------------------------------------------------------------------
// Condensed matrix

/// Symmetric pairwise distances stored as the strict upper triangle, row-major:
/// (0,1), (0,2), ..., (0,n-1), (1,2), ...
class DistanceMatrix {
public:
    DistanceMatrix() = default;

    DistanceMatrix(std::size_t n, MetricConfig metric) : n_(n), metric_(metric), entries_(pair_count(n), 0.0) {}

    DistanceMatrix(std::size_t n, MetricConfig metric, std::vector<double> entries)
        : n_(n), metric_(metric), entries_(std::move(entries)) {
        if (entries_.size() != pair_count(n)) {
            throw std::invalid_argument("DistanceMatrix: expected " + std::to_string(pair_count(n)) + " entries, got " +
                                        std::to_string(entries_.size()));
        }
        for (double d : entries_) {
            if (!std::isfinite(d) || d < 0.0) {
                throw std::invalid_argument("DistanceMatrix: entries must be finite and non-negative");
            }
        }
    }

    static constexpr std::size_t pair_count(std::size_t n) noexcept { return n < 2 ? 0 : n * (n - 1) / 2; }

    [[nodiscard]] std::size_t         size() const noexcept { return n_; }
    [[nodiscard]] const MetricConfig& metric() const noexcept { return metric_; }
    [[nodiscard]] std::span<const double> entries() const noexcept { return entries_; }

    /// Offset of the unordered pair {i, j}, i != j.
    [[nodiscard]] std::size_t offset(std::size_t i, std::size_t j) const noexcept {
        if (i > j) std::swap(i, j);
        return i * n_ - i * (i + 1) / 2 + (j - i - 1);
    }

    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept {
        return i == j ? 0.0 : entries_[offset(i, j)];
    }

    void set(std::size_t i, std::size_t j, double value) { entries_[offset(i, j)] = value; }

private:
    std::size_t         n_ = 0;
    MetricConfig        metric_{};
    std::vector<double> entries_;
};

struct PairwiseOptions {
    /// 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
    /// Print a warning to std::clog when the dataset is raw.
    bool     warn    = true;
};

/// Fills every unordered pair with the configured distance. Rows are split
/// across threads; each entry is written once, so the result matches a serial fill bit for bit.
inline DistanceMatrix pairwise_matrix(const Dataset& dataset, const MetricConfig& metric,
                                      const PairwiseOptions& options = {}) {
    const std::size_t n = dataset.size();
    if (n < 2) {
        throw std::invalid_argument("pairwise_matrix: need at least 2 curves");
    }
    if (metric.kind == MetricKind::dtw) {
        metric.validate();
    }
    if (options.warn && dataset.normalization == Normalization::raw) {
        std::clog << "warning: computing distances on a raw (unnormalized) dataset\n";
    }

    DistanceMatrix matrix(n, metric);
    unsigned       threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads                = static_cast<unsigned>(std::min<std::size_t>(threads, n - 1));

    std::vector<std::exception_ptr> failures(threads);
    auto fill_rows = [&](unsigned worker) {
        DtwWorkspace ws(kHoursPerDay);
        // Interleaved rows balance the shrinking triangle across workers.
        for (std::size_t i = worker; i + 1 < n; i += threads) {
            for (std::size_t j = i + 1; j < n; ++j) {
                try {
                    matrix.set(i, j, distance(dataset.values(i), dataset.values(j), metric, ws));
                } catch (const std::exception& e) {
                    failures[worker] = std::make_exception_ptr(std::invalid_argument(
                        "pairwise_matrix: pair (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what()));
                    return;
                }
            }
        }
    };

    if (threads == 1) {
        fill_rows(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(fill_rows, t);
        }
    }
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }

    if (options.warn && metric.kind == MetricKind::cosine) {
        const CurveValues zero{};
        std::size_t       flat = 0;
        for (const auto& curve : dataset.curves) {
            flat += euclidean(curve.values, zero) < kCosineNormFloor;
        }
        if (flat > 0) {
            std::clog << "warning: " << flat << " all-zero curve(s); cosine distance to them is fixed at 1\n";
        }
    }
    return matrix;
}

}  // namespace loadclust

#pragma once

#include "loadclust/curves.hpp"
#include "loadclust/distance.hpp"
#include "loadclust/random.hpp"
#include "loadclust/result.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace loadclust {

enum class CovarianceKind { diagonal, full };

inline std::string_view to_string(CovarianceKind kind) { return kind == CovarianceKind::diagonal ? "diagonal" : "full"; }

enum class KMeansInit { random, plusplus };

struct FitOptions {
    std::size_t    k                      = 2;
    std::uint64_t  seed                   = 0;
    std::size_t    max_iterations         = 300;
    double         tolerance              = 1e-6;
    double         covariance_regularizer = 1e-6;
    CovarianceKind covariance_kind        = CovarianceKind::diagonal;
    /// Independent runs; run r is seeded with seed + r and the best one is kept.
    std::size_t    restarts = 10;

    void validate(std::size_t n) const {
        if (k < 2) throw std::invalid_argument("FitOptions: k must be >= 2");
        if (k > n) {
            throw std::invalid_argument("FitOptions: k = " + std::to_string(k) + " exceeds dataset size " +
                                        std::to_string(n));
        }
        if (max_iterations == 0 || restarts == 0) {
            throw std::invalid_argument("FitOptions: max_iterations and restarts must be positive");
        }
        if (!(tolerance > 0.0) || !(covariance_regularizer > 0.0)) {
            throw std::invalid_argument("FitOptions: tolerance and covariance_regularizer must be positive");
        }
    }
};

/// Per-restart objective traces and failures, for inspection and tests.
struct FitDiagnostics {
    /// kmeans: SSE after each iteration; kmedoids: total cost per assignment; gmm: mean log-likelihood per E-step.
    std::vector<std::vector<double>>      traces;
    /// gmm only: trace positions immediately after a component was reinitialized.
    std::vector<std::vector<std::size_t>> resets;
    std::vector<std::string>              failures;
    std::size_t                           best_restart = 0;
    /// gmm only: worst |sum of a point's responsibilities - 1| over every E-step.
    double                                max_responsibility_error = 0.0;
};

namespace detail {

inline void require_normalized(const Dataset& dataset, const char* who) {
    if (dataset.normalization == Normalization::raw) {
        throw std::invalid_argument(std::string(who) + ": dataset must be normalized");
    }
}

inline double squared_distance(const CurveValues& a, const CurveValues& b) {
    double acc = 0.0;
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        const double d = a[h] - b[h];
        acc += d * d;
    }
    return acc;
}

/// k distinct indices from [0, n) via a partial Fisher-Yates shuffle.
inline std::vector<std::size_t> distinct_indices(Random& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

/// D²-weighted seeding. When every remaining point coincides with a chosen
/// centre, the next one is drawn uniformly from the unchosen indices.
inline std::vector<std::size_t> plusplus_seeds(Random& rng, const Dataset& dataset, std::size_t k) {
    const std::size_t        n = dataset.size();
    std::vector<std::size_t> seeds{static_cast<std::size_t>(rng.uniform_index(n))};
    std::vector<double>      nearest(n);
    std::vector<bool>        chosen(n, false);
    chosen[seeds[0]] = true;
    for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(dataset.values(i), dataset.values(seeds[0]));

    while (seeds.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += nearest[i];
        std::size_t next = n;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double       cumulative = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (nearest[i] <= 0.0) continue;
                cumulative += nearest[i];
                next = i;
                if (cumulative > target) break;
            }
        } else {
            std::vector<std::size_t> unchosen;
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) unchosen.push_back(i);
            }
            next = unchosen[static_cast<std::size_t>(rng.uniform_index(unchosen.size()))];
        }
        seeds.push_back(next);
        chosen[next] = true;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(dataset.values(i), dataset.values(next)));
        }
    }
    return seeds;
}

struct KMeansRun {
    std::vector<std::size_t> assignments;
    VectorPrototypes         centroids;
    double                   objective  = 0.0;
    std::size_t              iterations = 0;
    bool                     converged  = false;
    std::vector<double>      trace;
};

inline KMeansRun kmeans_run(const Dataset& dataset, const FitOptions& options, KMeansInit init, std::uint64_t seed) {
    const std::size_t n = dataset.size();
    const std::size_t k = options.k;
    Random            rng(seed);

    const auto seeds = init == KMeansInit::random ? distinct_indices(rng, n, k) : plusplus_seeds(rng, dataset, k);
    KMeansRun run;
    for (std::size_t s : seeds) run.centroids.push_back(dataset.values(s));
    run.assignments.assign(n, k);

    std::vector<double> dist(n);
    double              previous = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        std::vector<std::size_t> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best   = 0;
            double      best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = squared_distance(dataset.values(i), run.centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best   = c;
                }
            }
            labels[i] = best;
            dist[i]   = best_d;
        }

        // Empty clusters take the point farthest from its centroid, drawn from clusters with > 1 member.
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t l : labels) ++counts[l];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[labels[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
            }
            --counts[labels[far]];
            labels[far]      = c;
            dist[far]        = 0.0;
            counts[c]        = 1;
            run.centroids[c] = dataset.values(far);
        }

        for (std::size_t c = 0; c < k; ++c) run.centroids[c].fill(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& centroid = run.centroids[labels[i]];
            for (std::size_t h = 0; h < kHoursPerDay; ++h) centroid[h] += dataset.values(i)[h];
        }
        for (std::size_t c = 0; c < k; ++c) {
            for (auto& v : run.centroids[c]) v /= static_cast<double>(counts[c]);
        }
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) objective += squared_distance(dataset.values(i), run.centroids[labels[i]]);

        run.trace.push_back(objective);
        run.iterations = iter + 1;
        const bool unchanged = labels == run.assignments;
        run.assignments      = std::move(labels);
        run.objective        = objective;
        if (unchanged || previous - objective < options.tolerance) {
            run.converged = true;
            break;
        }
        previous = objective;
    }
    return run;
}

}  // namespace detail

/// Lloyd's algorithm with Euclidean distance, best of `options.restarts` runs by SSE.
inline ClusteringResult kmeans(const Dataset& dataset, const FitOptions& options, KMeansInit init,
                               FitDiagnostics* diagnostics = nullptr) {
    detail::require_normalized(dataset, "kmeans");
    validate(dataset);
    options.validate(dataset.size());

    std::optional<detail::KMeansRun> best;
    std::size_t                      best_restart = 0;
    for (std::size_t r = 0; r < options.restarts; ++r) {
        auto run = detail::kmeans_run(dataset, options, init, options.seed + r);
        if (diagnostics) diagnostics->traces.push_back(run.trace);
        if (!best || run.objective < best->objective) {
            best         = std::move(run);
            best_restart = r;
        }
    }
    if (diagnostics) diagnostics->best_restart = best_restart;

    ClusteringResult result;
    result.assignments       = std::move(best->assignments);
    result.k                 = options.k;
    result.prototypes        = std::move(best->centroids);
    result.method.method     = init == KMeansInit::random ? Method::kmeans : Method::kmeanspp;
    result.method.metric     = MetricConfig{MetricKind::euclidean, 1};
    result.method.seed       = options.seed;
    result.method.iterations = best->iterations;
    result.method.converged  = best->converged;
    result.objective         = best->objective;
    return result;
}

// ---------------------------------------------------------------------------
// K-medoids

namespace detail {

struct KMedoidsRun {
    std::vector<std::size_t> assignments;
    std::vector<std::size_t> medoids;
    double                   cost       = 0.0;
    std::size_t              iterations = 0;
    bool                     converged  = false;
    std::vector<double>      trace;
};

/// Each medoid keeps itself; other points go to the nearest medoid, ties to the lower cluster index.
inline double assign_to_medoids(const DistanceMatrix& matrix, const std::vector<std::size_t>& medoids,
                                std::vector<std::size_t>& labels) {
    const std::size_t n = matrix.size();
    labels.assign(n, medoids.size());
    for (std::size_t c = 0; c < medoids.size(); ++c) labels[medoids[c]] = c;
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != medoids.size()) continue;
        std::size_t best   = 0;
        double      best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < medoids.size(); ++c) {
            const double d = matrix(i, medoids[c]);
            if (d < best_d) {
                best_d = d;
                best   = c;
            }
        }
        labels[i] = best;
        cost += best_d;
    }
    return cost;
}

inline KMedoidsRun kmedoids_run(const DistanceMatrix& matrix, const FitOptions& options, std::uint64_t seed) {
    Random      rng(seed);
    KMedoidsRun run;
    run.medoids = distinct_indices(rng, matrix.size(), options.k);

    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        run.cost = assign_to_medoids(matrix, run.medoids, run.assignments);
        run.trace.push_back(run.cost);
        run.iterations = iter + 1;

        const auto               groups = cluster_members(run.assignments, options.k);
        std::vector<std::size_t> updated;
        updated.reserve(options.k);
        for (const auto& members : groups) updated.push_back(medoid_of(members, matrix));
        if (updated == run.medoids) {
            run.converged = true;
            return run;
        }
        run.medoids = std::move(updated);
    }
    // Out of iterations with fresh medoids: make the assignment consistent with them.
    run.cost = assign_to_medoids(matrix, run.medoids, run.assignments);
    run.trace.push_back(run.cost);
    return run;
}

}  // namespace detail

/// Voronoi-iteration K-medoids over a precomputed matrix; best of `options.restarts` by total cost.
inline ClusteringResult kmedoids(const DistanceMatrix& matrix, const FitOptions& options,
                                 FitDiagnostics* diagnostics = nullptr) {
    options.validate(matrix.size());
    std::optional<detail::KMedoidsRun> best;
    std::size_t                        best_restart = 0;
    for (std::size_t r = 0; r < options.restarts; ++r) {
        auto run = detail::kmedoids_run(matrix, options, options.seed + r);
        if (diagnostics) diagnostics->traces.push_back(run.trace);
        if (!best || run.cost < best->cost) {
            best         = std::move(run);
            best_restart = r;
        }
    }
    if (diagnostics) diagnostics->best_restart = best_restart;

    ClusteringResult result;
    result.assignments       = std::move(best->assignments);
    result.k                 = options.k;
    result.prototypes        = std::move(best->medoids);
    result.method.method     = Method::kmedoids;
    result.method.metric     = matrix.metric();
    result.method.seed       = options.seed;
    result.method.iterations = best->iterations;
    result.method.converged  = best->converged;
    result.objective         = best->cost;
    return result;
}

inline ClusteringResult kmedoids(const Dataset& dataset, const FitOptions& options, const MetricConfig& metric,
                                 FitDiagnostics* diagnostics = nullptr) {
    detail::require_normalized(dataset, "kmedoids");
    options.validate(dataset.size());
    return kmedoids(pairwise_matrix(dataset, metric), options, diagnostics);
}

// ---------------------------------------------------------------------------
// Gaussian mixture

namespace detail {

inline constexpr double kMinComponentWeight = 1e-8;

struct GmmComponent {
    double          weight = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  ///< diagonal kind keeps only the diagonal populated

    // Cached for density evaluation.
    double          log_norm = 0.0;
    Eigen::MatrixXd chol_lower;  ///< full kind only
};

class GaussianMixture {
public:
    GaussianMixture(const Eigen::MatrixXd& data, const FitOptions& options)
        : data_(data), options_(options), n_(static_cast<std::size_t>(data.rows())),
          dims_(static_cast<std::size_t>(data.cols())) {
        global_variance_ = (data_.rowwise() - data_.colwise().mean()).array().square().colwise().mean().transpose();
    }

    /// Means from a K-means++ fit; weights and covariances from its partition.
    bool initialize(std::uint64_t seed, const Dataset& dataset) {
        FitOptions init    = options_;
        init.seed          = seed;
        init.restarts      = 1;
        const auto seeded  = kmeans(dataset, init, KMeansInit::plusplus);
        const auto groups  = cluster_members(seeded.assignments, options_.k);
        const auto& centroids = std::get<VectorPrototypes>(seeded.prototypes);

        components_.assign(options_.k, {});
        for (std::size_t c = 0; c < options_.k; ++c) {
            auto& comp  = components_[c];
            comp.weight = static_cast<double>(groups[c].size()) / static_cast<double>(n_);
            comp.mean   = Eigen::Map<const Eigen::VectorXd>(centroids[c].data(), static_cast<Eigen::Index>(dims_));
            if (groups[c].size() < 2) {
                comp.covariance = Eigen::MatrixXd(global_variance_.asDiagonal());
            } else {
                comp.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dims_), static_cast<Eigen::Index>(dims_));
                for (std::size_t i : groups[c]) {
                    const Eigen::VectorXd d = data_.row(static_cast<Eigen::Index>(i)).transpose() - comp.mean;
                    comp.covariance += d * d.transpose();
                }
                comp.covariance /= static_cast<double>(groups[c].size());
            }
            regularize(comp);
            if (!prepare(comp)) return false;
        }
        return true;
    }

    /// E-step: fills responsibilities, returns the mean log-likelihood (NaN on numerical failure).
    double expectation(Eigen::MatrixXd& resp, Eigen::VectorXd& point_ll, double& max_sum_error) const {
        const auto k = static_cast<Eigen::Index>(options_.k);
        resp.resize(static_cast<Eigen::Index>(n_), k);
        point_ll.resize(static_cast<Eigen::Index>(n_));
        double total = 0.0;
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n_); ++i) {
            double peak = -std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < k; ++c) {
                const auto& comp = components_[static_cast<std::size_t>(c)];
                resp(i, c)       = std::log(comp.weight) + log_density(comp, data_.row(i).transpose());
                peak             = std::max(peak, resp(i, c));
            }
            if (!std::isfinite(peak)) return std::numeric_limits<double>::quiet_NaN();
            double sum = 0.0;
            for (Eigen::Index c = 0; c < k; ++c) sum += std::exp(resp(i, c) - peak);
            const double ll = peak + std::log(sum);
            double       check = 0.0;
            for (Eigen::Index c = 0; c < k; ++c) {
                resp(i, c) = std::exp(resp(i, c) - ll);
                check += resp(i, c);
            }
            max_sum_error = std::max(max_sum_error, std::abs(check - 1.0));
            point_ll(i)   = ll;
            total += ll;
        }
        const double mean = total / static_cast<double>(n_);
        return std::isfinite(mean) ? mean : std::numeric_limits<double>::quiet_NaN();
    }

    bool maximization(const Eigen::MatrixXd& resp) {
        for (std::size_t c = 0; c < options_.k; ++c) {
            auto&           comp = components_[c];
            const auto      col  = resp.col(static_cast<Eigen::Index>(c));
            const double    nk   = col.sum();
            comp.weight          = nk / static_cast<double>(n_);
            comp.mean            = (data_.transpose() * col) / nk;
            const Eigen::MatrixXd centered = data_.rowwise() - comp.mean.transpose();
            if (options_.covariance_kind == CovarianceKind::diagonal) {
                const Eigen::VectorXd var = (centered.array().square().colwise() * col.array()).colwise().sum().transpose() / nk;
                comp.covariance           = Eigen::MatrixXd(var.asDiagonal());
            } else {
                comp.covariance = (centered.transpose() * col.asDiagonal() * centered) / nk;
            }
            regularize(comp);
            if (!prepare(comp)) return false;
        }
        return true;
    }

    /// Re-seat component c on point `anchor` with the global variance.
    bool reinitialize(std::size_t c, std::size_t anchor) {
        auto& comp      = components_[c];
        comp.mean       = data_.row(static_cast<Eigen::Index>(anchor)).transpose();
        comp.covariance = Eigen::MatrixXd(global_variance_.asDiagonal());
        comp.weight     = 1.0 / static_cast<double>(n_);
        regularize(comp);
        double total = 0.0;
        for (const auto& other : components_) total += other.weight;
        for (auto& other : components_) other.weight /= total;
        return prepare(comp);
    }

    [[nodiscard]] VectorPrototypes means() const {
        VectorPrototypes out(options_.k);
        for (std::size_t c = 0; c < options_.k; ++c) {
            for (std::size_t h = 0; h < dims_; ++h) out[c][h] = components_[c].mean(static_cast<Eigen::Index>(h));
        }
        return out;
    }

    [[nodiscard]] double weight(std::size_t c) const { return components_[c].weight; }

private:
    void regularize(GmmComponent& comp) const {
        comp.covariance.diagonal().array() += options_.covariance_regularizer;
    }

    bool prepare(GmmComponent& comp) const {
        const double log_2pi = std::log(2.0 * std::numbers::pi);
        if (options_.covariance_kind == CovarianceKind::diagonal) {
            const Eigen::VectorXd var = comp.covariance.diagonal();
            comp.log_norm = -0.5 * (static_cast<double>(dims_) * log_2pi + var.array().log().sum());
        } else {
            Eigen::LLT<Eigen::MatrixXd> llt(comp.covariance);
            if (llt.info() != Eigen::Success) return false;
            comp.chol_lower = llt.matrixL();
            comp.log_norm   = -0.5 * static_cast<double>(dims_) * log_2pi -
                            comp.chol_lower.diagonal().array().log().sum();
        }
        return std::isfinite(comp.log_norm);
    }

    [[nodiscard]] double log_density(const GmmComponent& comp, const Eigen::VectorXd& x) const {
        const Eigen::VectorXd d = x - comp.mean;
        double                quad;
        if (options_.covariance_kind == CovarianceKind::diagonal) {
            quad = (d.array().square() / comp.covariance.diagonal().array()).sum();
        } else {
            quad = comp.chol_lower.triangularView<Eigen::Lower>().solve(d).squaredNorm();
        }
        return comp.log_norm - 0.5 * quad;
    }

    const Eigen::MatrixXd&    data_;
    const FitOptions&         options_;
    std::size_t               n_;
    std::size_t               dims_;
    Eigen::VectorXd           global_variance_;
    std::vector<GmmComponent> components_;
};

struct GmmRun {
    std::vector<std::size_t> assignments;
    VectorPrototypes         means;
    double                   log_likelihood = -std::numeric_limits<double>::infinity();
    std::size_t              iterations     = 0;
    bool                     converged      = false;
    std::vector<double>      trace;
    std::vector<std::size_t> resets;
    std::optional<std::string> failure;
};

inline std::vector<std::size_t> argmax_rows(const Eigen::MatrixXd& resp) {
    std::vector<std::size_t> labels(static_cast<std::size_t>(resp.rows()));
    for (Eigen::Index i = 0; i < resp.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < resp.cols(); ++c) {
            if (resp(i, c) > resp(i, best)) best = c;
        }
        labels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    return labels;
}

inline GmmRun gmm_run(const Dataset& dataset, const Eigen::MatrixXd& data, const FitOptions& options,
                      std::uint64_t seed, double& max_sum_error) {
    GmmRun          run;
    GaussianMixture mixture(data, options);
    if (!mixture.initialize(seed, dataset)) {
        run.failure = "singular covariance at initialization";
        return run;
    }

    Eigen::MatrixXd resp;
    Eigen::VectorXd point_ll;
    bool            repaired = false;
    double          previous = -std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        const double ll = mixture.expectation(resp, point_ll, max_sum_error);
        if (std::isnan(ll)) {
            run.failure = "non-finite log-likelihood at iteration " + std::to_string(iter);
            return run;
        }
        run.trace.push_back(ll);
        run.iterations     = iter + 1;
        run.log_likelihood = ll;
        run.assignments    = argmax_rows(resp);
        run.means          = mixture.means();

        std::vector<std::size_t> counts(options.k, 0);
        for (std::size_t l : run.assignments) ++counts[l];
        std::optional<std::size_t> collapsed;
        for (std::size_t c = 0; c < options.k; ++c) {
            if (counts[c] == 0 || resp.col(static_cast<Eigen::Index>(c)).sum() / static_cast<double>(dataset.size()) <
                                      kMinComponentWeight) {
                collapsed = c;
                break;
            }
        }
        if (collapsed) {
            if (repaired) {
                run.converged = false;
                break;
            }
            repaired = true;
            Eigen::Index anchor;
            point_ll.minCoeff(&anchor);
            if (!mixture.reinitialize(*collapsed, static_cast<std::size_t>(anchor))) {
                run.failure = "singular covariance after component reset";
                return run;
            }
            run.resets.push_back(run.trace.size());
            previous = -std::numeric_limits<double>::infinity();
            continue;
        }
        if (ll - previous < options.tolerance) {
            run.converged = true;
            break;
        }
        previous = ll;
        if (!mixture.maximization(resp)) {
            run.failure = "singular covariance at iteration " + std::to_string(iter);
            return run;
        }
    }
    std::vector<std::size_t> counts(options.k, 0);
    for (std::size_t l : run.assignments) ++counts[l];
    if (std::find(counts.begin(), counts.end(), 0) != counts.end()) {
        run.failure = "a component lost all points";
    }
    return run;
}

}  // namespace detail

/// EM fit of a k-component Gaussian mixture, initialized from K-means++.
/// Returns the restart with the highest final mean log-likelihood; restarts
/// that fail numerically or end with an empty component are skipped.
inline ClusteringResult gmm_em(const Dataset& dataset, const FitOptions& options,
                               FitDiagnostics* diagnostics = nullptr) {
    detail::require_normalized(dataset, "gmm_em");
    validate(dataset);
    options.validate(dataset.size());

    Eigen::MatrixXd data(static_cast<Eigen::Index>(dataset.size()), static_cast<Eigen::Index>(kHoursPerDay));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)) = dataset.values(i)[h];
        }
    }

    std::optional<detail::GmmRun> best;
    std::size_t                   best_restart = 0;
    double                        sum_error    = 0.0;
    std::vector<std::string>      failures;
    for (std::size_t r = 0; r < options.restarts; ++r) {
        auto run = detail::gmm_run(dataset, data, options, options.seed + r, sum_error);
        if (diagnostics) {
            diagnostics->traces.push_back(run.trace);
            diagnostics->resets.push_back(run.resets);
        }
        if (run.failure) {
            failures.push_back("restart " + std::to_string(r) + ": " + *run.failure);
            continue;
        }
        if (!best || run.log_likelihood > best->log_likelihood) {
            best         = std::move(run);
            best_restart = r;
        }
    }
    if (diagnostics) {
        diagnostics->failures                 = failures;
        diagnostics->best_restart             = best_restart;
        diagnostics->max_responsibility_error = sum_error;
    }
    if (!best) {
        throw Error("gmm_em: every restart failed (" + failures.front() + ")");
    }

    ClusteringResult result;
    result.assignments       = std::move(best->assignments);
    result.k                 = options.k;
    result.prototypes        = std::move(best->means);
    result.method.method     = Method::gmm;
    result.method.metric     = MetricConfig{MetricKind::euclidean, 1};
    result.method.seed       = options.seed;
    result.method.iterations = best->iterations;
    result.method.converged  = best->converged;
    result.objective         = best->log_likelihood;
    return result;
}

}  // namespace loadclust

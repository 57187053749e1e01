#pragma once

#include "loadclust/core.hpp"
#include "loadclust/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace loadclust {

/// Calendar date, proleptic Gregorian.
struct Date {
    int      year  = 1970;
    unsigned month = 1;
    unsigned day   = 1;

    auto operator<=>(const Date&) const = default;

    [[nodiscard]] bool valid() const {
        return std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                           std::chrono::day{day}}
            .ok();
    }

    [[nodiscard]] Date plus_days(int n) const {
        using namespace std::chrono;
        const sys_days shifted = sys_days{year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                                         std::chrono::day{day}}} +
                                 days{n};
        const year_month_day ymd{shifted};
        return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day())};
    }

    /// ISO-8601 `YYYY-MM-DD`.
    [[nodiscard]] std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
        return buf;
    }

    /// Parses strict `YYYY-MM-DD`; nullopt on any deviation.
    static std::optional<Date> parse(std::string_view text) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
            return std::nullopt;
        }
        auto digits = [&](std::size_t from, std::size_t count) -> std::optional<int> {
            int value = 0;
            for (std::size_t i = from; i < from + count; ++i) {
                if (text[i] < '0' || text[i] > '9') {
                    return std::nullopt;
                }
                value = value * 10 + (text[i] - '0');
            }
            return value;
        };
        const auto y = digits(0, 4);
        const auto m = digits(5, 2);
        const auto d = digits(8, 2);
        if (!y || !m || !d) {
            return std::nullopt;
        }
        Date date{*y, static_cast<unsigned>(*m), static_cast<unsigned>(*d)};
        if (!date.valid()) {
            return std::nullopt;
        }
        return date;
    }
};

enum class Normalization { raw, per_curve, per_hour };

inline std::string_view to_string(Normalization mode) {
    switch (mode) {
        case Normalization::raw: return "raw";
        case Normalization::per_curve: return "per-curve";
        case Normalization::per_hour: return "per-hour";
    }
    return "raw";
}

inline std::optional<Normalization> parse_normalization(std::string_view text) {
    if (text == "raw") return Normalization::raw;
    if (text == "per-curve") return Normalization::per_curve;
    if (text == "per-hour") return Normalization::per_hour;
    return std::nullopt;
}

/// One household-day of hourly consumption.
struct LoadCurve {
    CurveValues values{};
    std::string household_id;
    Date        date;
    bool        normalized = false;
    /// Zero-variance curve forced to all zeros during normalization.
    bool        degenerate = false;
};

struct Dataset {
    std::vector<LoadCurve> curves;
    Normalization          normalization = Normalization::raw;

    [[nodiscard]] std::size_t size() const noexcept { return curves.size(); }
    [[nodiscard]] bool        empty() const noexcept { return curves.empty(); }
    [[nodiscard]] const CurveValues& values(std::size_t i) const { return curves[i].values; }
};

/// Throws std::invalid_argument if a dataset breaks the shared-state or finiteness invariants.
inline void validate(const Dataset& dataset) {
    const bool normalized = dataset.normalization != Normalization::raw;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& curve = dataset.curves[i];
        if (curve.normalized != normalized) {
            throw std::invalid_argument("curve " + std::to_string(i) + " normalization flag disagrees with dataset");
        }
        for (double v : curve.values) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("curve " + std::to_string(i) + " has a non-finite value");
            }
        }
    }
}

struct RawReading {
    std::string household_id;
    Date        date;
    int         hour = 0;
    double      kwh  = 0.0;
};

// ---------------------------------------------------------------------------
// Normalization

inline constexpr double kDefaultNormalizationEpsilon = 1e-12;

/// Z-scores the 24 values with the population standard deviation. Curves with
/// std below `epsilon` come back as all zeros with `degenerate` set.
inline LoadCurve z_normalize(const LoadCurve& curve, double epsilon = kDefaultNormalizationEpsilon) {
    if (curve.normalized) {
        throw std::invalid_argument("z_normalize: curve is already normalized");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("z_normalize: epsilon must be positive");
    }
    double sum = 0.0;
    for (double v : curve.values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("z_normalize: non-finite value in curve");
        }
        sum += v;
    }
    const double mean = sum / static_cast<double>(kHoursPerDay);
    double       ss   = 0.0;
    for (double v : curve.values) {
        ss += (v - mean) * (v - mean);
    }
    const double sigma = std::sqrt(ss / static_cast<double>(kHoursPerDay));

    LoadCurve out  = curve;
    out.normalized = true;
    if (sigma < epsilon) {
        out.values.fill(0.0);
        out.degenerate = true;
        return out;
    }
    for (auto& v : out.values) {
        v = (v - mean) / sigma;
    }
    out.degenerate = false;
    return out;
}

inline Dataset normalize_dataset(const Dataset& dataset, Normalization mode,
                                 double epsilon = kDefaultNormalizationEpsilon) {
    if (dataset.empty()) {
        throw std::invalid_argument("normalize_dataset: empty dataset");
    }
    if (dataset.normalization != Normalization::raw) {
        throw std::invalid_argument("normalize_dataset: dataset is already normalized");
    }
    Dataset out;
    out.normalization = mode;
    out.curves.reserve(dataset.size());

    switch (mode) {
        case Normalization::raw:
            throw std::invalid_argument("normalize_dataset: target mode must be per-curve or per-hour");
        case Normalization::per_curve:
            for (const auto& curve : dataset.curves) {
                out.curves.push_back(z_normalize(curve, epsilon));
            }
            break;
        case Normalization::per_hour: {
            validate(dataset);
            const auto n = static_cast<double>(dataset.size());
            CurveValues mean{};
            CurveValues sigma{};
            for (std::size_t h = 0; h < kHoursPerDay; ++h) {
                double sum = 0.0;
                for (const auto& curve : dataset.curves) {
                    sum += curve.values[h];
                }
                mean[h]   = sum / n;
                double ss = 0.0;
                for (const auto& curve : dataset.curves) {
                    ss += (curve.values[h] - mean[h]) * (curve.values[h] - mean[h]);
                }
                sigma[h] = std::sqrt(ss / n);
            }
            for (const auto& curve : dataset.curves) {
                LoadCurve z  = curve;
                z.normalized = true;
                z.degenerate = false;
                for (std::size_t h = 0; h < kHoursPerDay; ++h) {
                    z.values[h] = sigma[h] < epsilon ? 0.0 : (curve.values[h] - mean[h]) / sigma[h];
                }
                out.curves.push_back(std::move(z));
            }
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ingestion

struct ReshapeResult {
    Dataset     dataset;
    std::size_t dropped_days = 0;
};

/// Groups readings into complete household-days. Last duplicate wins; days
/// without all 24 hours are dropped and counted.
inline ReshapeResult reshape_readings(const std::vector<RawReading>& readings) {
    using Key = std::pair<std::string, Date>;
    std::map<Key, std::array<std::optional<double>, kHoursPerDay>> days;
    for (const auto& reading : readings) {
        if (reading.hour < 0 || reading.hour >= static_cast<int>(kHoursPerDay)) {
            throw std::invalid_argument("reshape_readings: hour out of range for " + reading.household_id);
        }
        if (!std::isfinite(reading.kwh) || reading.kwh < 0.0) {
            throw std::invalid_argument("reshape_readings: kwh must be finite and non-negative");
        }
        days[{reading.household_id, reading.date}][static_cast<std::size_t>(reading.hour)] = reading.kwh;
    }

    ReshapeResult result;
    for (const auto& [key, hours] : days) {
        const bool complete = std::all_of(hours.begin(), hours.end(), [](const auto& v) { return v.has_value(); });
        if (!complete) {
            ++result.dropped_days;
            continue;
        }
        LoadCurve curve;
        curve.household_id = key.first;
        curve.date         = key.second;
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            curve.values[h] = *hours[h];
        }
        result.dataset.curves.push_back(std::move(curve));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Synthetic data

struct Archetype {
    std::string name;
    CurveValues shape{};
};

/// Built-in daily shapes, in kWh. The first three have distinct, non-overlapping peaks.
inline const std::vector<Archetype>& builtin_archetypes() {
    static const std::vector<Archetype> archetypes = {
        {"morning_peak", {0.400, 0.400, 0.402, 0.418, 0.505, 0.799, 1.370, 1.914, 1.914, 1.370, 0.799, 0.505,
                          0.418, 0.402, 0.400, 0.400, 0.400, 0.400, 0.400, 0.400, 0.400, 0.400, 0.400, 0.400}},
        {"evening_peak", {0.400, 0.400, 0.400, 0.400, 0.400, 0.400, 0.400, 0.400, 0.400, 0.400, 0.400, 0.401,
                          0.404, 0.422, 0.488, 0.671, 1.049, 1.613, 2.165, 2.400, 2.165, 1.613, 1.049, 0.671}},
        {"midday_plateau", {0.400, 0.400, 0.400, 0.401, 0.402, 0.409, 0.430, 0.484, 0.603, 0.817, 1.130, 1.489,
                            1.785, 1.900, 1.785, 1.489, 1.130, 0.817, 0.603, 0.484, 0.430, 0.409, 0.402, 0.401}},
        {"double_peak", {0.400, 0.400, 0.400, 0.405, 0.453, 0.699, 1.248, 1.600, 1.248, 0.699, 0.453, 0.405,
                         0.400, 0.400, 0.402, 0.417, 0.499, 0.774, 1.310, 1.819, 1.819, 1.310, 0.774, 0.499}},
        {"night_load", {1.381, 1.660, 1.660, 1.381, 0.995, 0.681, 0.503, 0.430, 0.407, 0.401, 0.400, 0.400,
                        0.400, 0.400, 0.400, 0.400, 0.400, 0.400, 0.401, 0.407, 0.430, 0.503, 0.681, 0.995}},
        {"flat", {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
                  1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}},
    };
    return archetypes;
}

struct SyntheticSpec {
    std::vector<Archetype> archetypes;
    std::size_t            curves_per_archetype = 10;
    double                 noise_std            = 0.0;
    /// Each curve is circularly shifted by a uniform draw from [-max_shift, max_shift] hours.
    int                    max_shift = 0;
    Date                   start_date{2021, 1, 1};

    /// The first `k_true` built-in archetypes.
    static SyntheticSpec builtin(std::size_t k_true, std::size_t per_archetype, double noise, int shift) {
        const auto& all = builtin_archetypes();
        if (k_true == 0 || k_true > all.size()) {
            throw std::invalid_argument("SyntheticSpec: k_true must be in [1, " + std::to_string(all.size()) + "]");
        }
        SyntheticSpec spec;
        spec.archetypes.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k_true));
        spec.curves_per_archetype = per_archetype;
        spec.noise_std            = noise;
        spec.max_shift            = shift;
        return spec;
    }
};

struct SyntheticDataset {
    Dataset                  dataset;
    std::vector<std::size_t> labels;  ///< ground-truth archetype index per curve
};

inline CurveValues circular_shift(const CurveValues& values, int offset) {
    CurveValues out{};
    const int   n = static_cast<int>(kHoursPerDay);
    for (int h = 0; h < n; ++h) {
        out[static_cast<std::size_t>(((h + offset) % n + n) % n)] = values[static_cast<std::size_t>(h)];
    }
    return out;
}

/// Curves are emitted archetype by archetype. Household `synthetic-<a>` holds
/// archetype `a`, with consecutive dates from `start_date`.
inline SyntheticDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.archetypes.empty()) {
        throw std::invalid_argument("generate_synthetic: at least one archetype required");
    }
    if (spec.curves_per_archetype == 0) {
        throw std::invalid_argument("generate_synthetic: curves_per_archetype must be positive");
    }
    if (!(spec.noise_std >= 0.0) || spec.max_shift < 0) {
        throw std::invalid_argument("generate_synthetic: noise and shift range must be non-negative");
    }

    Random           rng(seed);
    SyntheticDataset out;
    for (std::size_t a = 0; a < spec.archetypes.size(); ++a) {
        for (std::size_t c = 0; c < spec.curves_per_archetype; ++c) {
            const int offset = static_cast<int>(rng.uniform_int(-spec.max_shift, spec.max_shift));
            LoadCurve curve;
            curve.values = circular_shift(spec.archetypes[a].shape, offset);
            for (auto& v : curve.values) {
                v += spec.noise_std * rng.normal();
            }
            curve.household_id = "synthetic-" + std::to_string(a);
            curve.date         = spec.start_date.plus_days(static_cast<int>(c));
            out.dataset.curves.push_back(std::move(curve));
            out.labels.push_back(a);
        }
    }
    return out;
}

}  // namespace loadclust

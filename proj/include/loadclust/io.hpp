#pragma once

// File formats. Doubles are written in shortest round-trip form, so reading a
// file back and writing it again reproduces it byte for byte.

#include "loadclust/ahc.hpp"
#include "loadclust/curves.hpp"
#include "loadclust/distance.hpp"
#include "loadclust/evaluation.hpp"
#include "loadclust/partitional.hpp"
#include "loadclust/result.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace loadclust::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Primitives

inline std::string format_double(double value) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error("format_double: conversion failed");
    return {buf, end};
}

inline std::optional<double> parse_double(std::string_view text) {
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) return std::nullopt;
    return value;
}

inline std::optional<long long> parse_integer(std::string_view text) {
    long long value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) return std::nullopt;
    return value;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t                   start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

/// Line reader that strips a trailing CR and tracks 1-based line numbers.
class LineReader {
public:
    LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }

private:
    std::istream& in_;
    std::string   source_;
    std::size_t   line_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed for " + path.string());
}

inline void check_identifier(const std::string& id) {
    if (id.empty() || id.find_first_of(",\r\n\"") != std::string::npos) {
        throw std::invalid_argument("household id must be non-empty without commas, quotes or newlines: '" + id + "'");
    }
}

// ---------------------------------------------------------------------------
// Raw readings: household_id,date,hour,kwh

inline constexpr std::string_view kReadingsHeader = "household_id,date,hour,kwh";

inline std::vector<RawReading> read_readings_csv(std::istream& in, const std::string& source = "readings") {
    LineReader reader(in, source);
    std::string line;
    if (!reader.next(line) || line != kReadingsHeader) {
        reader.fail("expected header '" + std::string(kReadingsHeader) + "'");
    }
    std::vector<RawReading> readings;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 4) reader.fail("expected 4 fields, got " + std::to_string(fields.size()));
        RawReading reading;
        reading.household_id = std::string(fields[0]);
        if (reading.household_id.empty()) reader.fail("empty household_id");
        const auto date = Date::parse(fields[1]);
        if (!date) reader.fail("invalid date '" + std::string(fields[1]) + "'");
        reading.date    = *date;
        const auto hour = parse_integer(fields[2]);
        if (!hour || *hour < 0 || *hour > 23) reader.fail("hour must be an integer in [0, 23]");
        reading.hour   = static_cast<int>(*hour);
        const auto kwh = parse_double(fields[3]);
        if (!kwh || !std::isfinite(*kwh) || *kwh < 0.0) reader.fail("kwh must be a finite non-negative number");
        reading.kwh = *kwh;
        readings.push_back(std::move(reading));
    }
    return readings;
}

inline std::string readings_csv(const std::vector<RawReading>& readings) {
    std::string out(kReadingsHeader);
    out += '\n';
    for (const auto& r : readings) {
        check_identifier(r.household_id);
        out += r.household_id + ',' + r.date.to_string() + ',' + std::to_string(r.hour) + ',' + format_double(r.kwh) +
               '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Curves: household_id,date,h0..h23 with a JSON sidecar manifest

inline std::string curves_header() {
    std::string header = "household_id,date";
    for (std::size_t h = 0; h < kHoursPerDay; ++h) header += ",h" + std::to_string(h);
    return header;
}

inline std::string curves_csv(const Dataset& dataset) {
    std::string out = curves_header() + '\n';
    for (const auto& curve : dataset.curves) {
        check_identifier(curve.household_id);
        out += curve.household_id + ',' + curve.date.to_string();
        for (double v : curve.values) out += ',' + format_double(v);
        out += '\n';
    }
    return out;
}

struct CurvesManifest {
    Normalization              normalization = Normalization::raw;
    std::vector<std::size_t>   degenerate;
    std::size_t                curves = 0;
    std::optional<std::size_t> dropped_days;
    std::optional<std::vector<std::size_t>> labels;
    Json                       config = Json::object();
};

inline CurvesManifest manifest_for(const Dataset& dataset) {
    CurvesManifest manifest;
    manifest.normalization = dataset.normalization;
    manifest.curves        = dataset.size();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset.curves[i].degenerate) manifest.degenerate.push_back(i);
    }
    return manifest;
}

inline Json to_json(const CurvesManifest& manifest) {
    Json j;
    j["normalization"] = std::string(to_string(manifest.normalization));
    j["curves"]        = manifest.curves;
    j["degenerate"]    = manifest.degenerate;
    if (manifest.dropped_days) j["dropped_days"] = *manifest.dropped_days;
    if (manifest.labels) j["labels"] = *manifest.labels;
    j["config"] = manifest.config;
    return j;
}

inline CurvesManifest manifest_from_json(const Json& j, const std::string& source = "manifest") {
    try {
        CurvesManifest manifest;
        const auto     mode = parse_normalization(j.at("normalization").get<std::string>());
        if (!mode) throw ParseError(source, 0, "unknown normalization mode");
        manifest.normalization = *mode;
        manifest.curves        = j.at("curves").get<std::size_t>();
        manifest.degenerate    = j.at("degenerate").get<std::vector<std::size_t>>();
        if (j.contains("dropped_days")) manifest.dropped_days = j["dropped_days"].get<std::size_t>();
        if (j.contains("labels")) manifest.labels = j["labels"].get<std::vector<std::size_t>>();
        if (j.contains("config")) manifest.config = j["config"];
        return manifest;
    } catch (const Json::exception& e) {
        throw ParseError(source, 0, e.what());
    }
}

/// Parses curve rows; normalization flags come from `manifest`.
inline Dataset read_curves_csv(std::istream& in, const CurvesManifest& manifest, const std::string& source = "curves") {
    LineReader  reader(in, source);
    std::string line;
    if (!reader.next(line) || line != curves_header()) reader.fail("expected header '" + curves_header() + "'");

    Dataset dataset;
    dataset.normalization = manifest.normalization;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != kHoursPerDay + 2) {
            reader.fail("expected " + std::to_string(kHoursPerDay + 2) + " fields, got " + std::to_string(fields.size()));
        }
        LoadCurve curve;
        curve.household_id = std::string(fields[0]);
        if (curve.household_id.empty()) reader.fail("empty household_id");
        const auto date = Date::parse(fields[1]);
        if (!date) reader.fail("invalid date '" + std::string(fields[1]) + "'");
        curve.date = *date;
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            const auto v = parse_double(fields[h + 2]);
            if (!v || !std::isfinite(*v)) reader.fail("invalid value in column h" + std::to_string(h));
            curve.values[h] = *v;
        }
        curve.normalized = manifest.normalization != Normalization::raw;
        dataset.curves.push_back(std::move(curve));
    }
    if (dataset.size() != manifest.curves) {
        throw ParseError(source, 0, "manifest lists " + std::to_string(manifest.curves) + " curves, file has " +
                                        std::to_string(dataset.size()));
    }
    for (std::size_t i : manifest.degenerate) {
        if (i >= dataset.size()) throw ParseError(source, 0, "degenerate index out of range");
        dataset.curves[i].degenerate = true;
    }
    return dataset;
}

/// Sidecar manifest path for a curves file: `<path>.manifest.json`.
inline std::filesystem::path manifest_path(const std::filesystem::path& curves) {
    return curves.string() + ".manifest.json";
}

inline void save_curves(const std::filesystem::path& path, const Dataset& dataset, const CurvesManifest& manifest) {
    write_file(path, curves_csv(dataset));
    write_file(manifest_path(path), to_json(manifest).dump(2) + '\n');
}

/// Loads a curves file and its manifest; a missing manifest means raw curves.
inline std::pair<Dataset, CurvesManifest> load_curves(const std::filesystem::path& path) {
    CurvesManifest manifest;
    const auto     sidecar = manifest_path(path);
    std::string    text    = read_file(path);
    if (std::filesystem::exists(sidecar)) {
        try {
            manifest = manifest_from_json(Json::parse(read_file(sidecar)), sidecar.string());
        } catch (const Json::parse_error& e) {
            throw ParseError(sidecar.string(), 0, e.what());
        }
    } else {
        manifest.curves = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
        manifest.curves = manifest.curves > 0 ? manifest.curves - 1 : 0;
    }
    std::istringstream in(text);
    Dataset            dataset = read_curves_csv(in, manifest, path.string());
    return {std::move(dataset), std::move(manifest)};
}

// ---------------------------------------------------------------------------
// Metric and clustering results

inline Json to_json(const MetricConfig& metric) {
    Json j;
    j["kind"] = std::string(to_string(metric.kind));
    if (metric.kind == MetricKind::dtw) j["window"] = metric.window;
    return j;
}

inline MetricConfig metric_from_json(const Json& j) {
    const auto kind = parse_metric_kind(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown metric kind");
    MetricConfig metric{*kind, 1};
    if (*kind == MetricKind::dtw) metric.window = j.at("window").get<std::size_t>();
    return metric;
}

inline Json to_json(const ClusteringResult& result) {
    Json method;
    method["algorithm"] = std::string(to_string(result.method.method));
    if (result.method.metric) method["metric"] = to_json(*result.method.metric);
    if (result.method.linkage) method["linkage"] = std::string(to_string(*result.method.linkage));
    if (result.method.average_mode) method["average_mode"] = std::string(to_string(*result.method.average_mode));

    Json j;
    j["method"]      = method;
    j["k"]           = result.k;
    j["seed"]        = result.method.seed;
    j["converged"]   = result.method.converged;
    j["iterations"]  = result.method.iterations;
    j["assignments"] = result.assignments;
    std::visit(
        [&](const auto& protos) {
            Json array = Json::array();
            for (const auto& p : protos) {
                if constexpr (std::is_same_v<std::decay_t<decltype(p)>, CurveValues>) {
                    array.push_back(Json(std::vector<double>(p.begin(), p.end())));
                } else {
                    array.push_back(p);
                }
            }
            j["prototypes"] = array;
        },
        result.prototypes);
    j["objective"] = result.objective;
    return j;
}

inline ClusteringResult result_from_json(const Json& j) {
    ClusteringResult result;
    const auto&      method = j.at("method");
    const auto       algo   = parse_method(method.at("algorithm").get<std::string>());
    if (!algo) throw Error("unknown algorithm");
    result.method.method = *algo;
    if (method.contains("metric")) result.method.metric = metric_from_json(method["metric"]);
    if (method.contains("linkage")) result.method.linkage = parse_linkage(method["linkage"].get<std::string>());
    if (method.contains("average_mode")) {
        result.method.average_mode = parse_average_mode(method["average_mode"].get<std::string>());
    }
    result.k                 = j.at("k").get<std::size_t>();
    result.method.seed       = j.at("seed").get<std::uint64_t>();
    result.method.converged  = j.at("converged").get<bool>();
    result.method.iterations = j.at("iterations").get<std::size_t>();
    result.assignments       = j.at("assignments").get<std::vector<std::size_t>>();
    const auto& protos       = j.at("prototypes");
    if (!protos.empty() && protos.front().is_array()) {
        VectorPrototypes vectors;
        for (const auto& p : protos) {
            const auto values = p.get<std::vector<double>>();
            if (values.size() != kHoursPerDay) throw Error("prototype vectors must have 24 values");
            CurveValues curve{};
            std::copy(values.begin(), values.end(), curve.begin());
            vectors.push_back(curve);
        }
        result.prototypes = std::move(vectors);
    } else {
        result.prototypes = protos.get<MedoidPrototypes>();
    }
    result.objective = j.at("objective").get<double>();
    return result;
}

// ---------------------------------------------------------------------------
// Dendrogram: step,left,right,height,new_size

inline constexpr std::string_view kDendrogramHeader = "step,left,right,height,new_size";

inline std::string dendrogram_csv(const Dendrogram& dendrogram) {
    std::string out(kDendrogramHeader);
    out += '\n';
    for (std::size_t s = 0; s < dendrogram.merges.size(); ++s) {
        const auto& m = dendrogram.merges[s];
        out += std::to_string(s) + ',' + std::to_string(m.left) + ',' + std::to_string(m.right) + ',' +
               format_double(m.height) + ',' + std::to_string(m.new_size) + '\n';
    }
    return out;
}

/// Merge steps only; linkage and metric are not part of the CSV.
inline std::vector<MergeStep> read_dendrogram_csv(std::istream& in, const std::string& source = "dendrogram") {
    LineReader  reader(in, source);
    std::string line;
    if (!reader.next(line) || line != kDendrogramHeader) reader.fail("expected header");
    std::vector<MergeStep> merges;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 5) reader.fail("expected 5 fields");
        const auto step = parse_integer(fields[0]);
        const auto left = parse_integer(fields[1]);
        const auto right = parse_integer(fields[2]);
        const auto height = parse_double(fields[3]);
        const auto size = parse_integer(fields[4]);
        if (!step || !left || !right || !height || !size || *step != static_cast<long long>(merges.size()) ||
            *left < 0 || *right < 0 || *size < 2) {
            reader.fail("malformed merge row");
        }
        merges.push_back({static_cast<std::size_t>(*left), static_cast<std::size_t>(*right), *height,
                          static_cast<std::size_t>(*size)});
    }
    return merges;
}

// ---------------------------------------------------------------------------
// Distance matrix cache: one JSON header line, then one condensed entry per line

inline std::string matrix_text(const DistanceMatrix& matrix) {
    Json header;
    header["format"] = "condensed-distance-matrix";
    header["n"]      = matrix.size();
    header["metric"] = to_json(matrix.metric());
    std::string out  = header.dump() + '\n';
    for (double d : matrix.entries()) out += format_double(d) + '\n';
    return out;
}

inline DistanceMatrix read_matrix(std::istream& in, const std::string& source = "matrix") {
    LineReader  reader(in, source);
    std::string line;
    if (!reader.next(line)) reader.fail("missing header");
    std::size_t  n = 0;
    MetricConfig metric;
    try {
        const Json header = Json::parse(line);
        if (header.at("format").get<std::string>() != "condensed-distance-matrix") reader.fail("unknown format");
        n      = header.at("n").get<std::size_t>();
        metric = metric_from_json(header.at("metric"));
        metric.validate();
    } catch (const Json::exception& e) {
        reader.fail(e.what());
    } catch (const std::invalid_argument& e) {
        reader.fail(e.what());
    }
    std::vector<double> entries;
    entries.reserve(DistanceMatrix::pair_count(n));
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto v = parse_double(line);
        if (!v || !std::isfinite(*v) || *v < 0.0) reader.fail("invalid distance entry");
        entries.push_back(*v);
    }
    if (entries.size() != DistanceMatrix::pair_count(n)) {
        throw ParseError(source, 0, "expected " + std::to_string(DistanceMatrix::pair_count(n)) + " entries, got " +
                                        std::to_string(entries.size()));
    }
    return {n, metric, std::move(entries)};
}

// ---------------------------------------------------------------------------
// Sweep reports: k,wcbcr plus JSON metadata; wide table for multi-method sweeps

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "k,wcbcr\n";
    for (const auto& row : rows) out += std::to_string(row.k) + ',' + format_double(row.wcbcr) + '\n';
    return out;
}

inline std::vector<SweepRow> read_sweep_csv(std::istream& in, const std::string& source = "sweep") {
    LineReader  reader(in, source);
    std::string line;
    if (!reader.next(line) || line != "k,wcbcr") reader.fail("expected header 'k,wcbcr'");
    std::vector<SweepRow> rows;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 2) reader.fail("expected 2 fields");
        const auto k = parse_integer(fields[0]);
        const auto w = parse_double(fields[1]);
        if (!k || *k < 1 || !w || !std::isfinite(*w)) reader.fail("malformed row");
        if (!rows.empty() && static_cast<std::size_t>(*k) <= rows.back().k) reader.fail("k must strictly increase");
        rows.push_back({static_cast<std::size_t>(*k), *w});
    }
    return rows;
}

inline Json to_json(const MethodConfig& config) {
    Json j;
    j["method"] = std::string(to_string(config.method));
    if (config.method == Method::ahc || config.method == Method::kmedoids) j["metric"] = to_json(config.metric);
    if (config.method == Method::ahc) {
        j["linkage"] = std::string(to_string(config.ahc.linkage));
        if (config.ahc.linkage == Linkage::average) j["average_mode"] = std::string(to_string(config.ahc.average_mode));
    } else {
        j["seed"]           = config.fit.seed;
        j["restarts"]       = config.fit.restarts;
        j["max_iterations"] = config.fit.max_iterations;
        j["tolerance"]      = config.fit.tolerance;
        if (config.method == Method::gmm) {
            j["covariance"]             = std::string(to_string(config.fit.covariance_kind));
            j["covariance_regularizer"] = config.fit.covariance_regularizer;
        }
    }
    return j;
}

inline Json sweep_metadata(const SweepReport& report, const std::optional<ElbowResult>& elbow_result) {
    Json j;
    j["method"]            = to_json(report.config);
    j["evaluation_metric"] = report.evaluation_metric;
    j["denominator"]       = "unordered prototype pairs";
    if (elbow_result) {
        j["elbow_k"]          = elbow_result->k;
        j["elbow_degenerate"] = elbow_result->degenerate;
    } else {
        j["elbow_k"] = nullptr;
    }
    Json failures = Json::array();
    for (const auto& f : report.failures) failures.push_back(Json{{"k", f.k}, {"diagnostic", f.diagnostic}});
    j["failures"] = failures;
    return j;
}

inline std::string sweep_table_csv(const SweepTable& table) {
    std::string out = "k";
    for (const auto& column : table.columns) out += ',' + column;
    out += '\n';
    for (std::size_t r = 0; r < table.ks.size(); ++r) {
        out += std::to_string(table.ks[r]);
        for (const auto& cell : table.cells[r]) out += ',' + (cell ? format_double(*cell) : std::string{});
        out += '\n';
    }
    return out;
}

}  // namespace loadclust::io

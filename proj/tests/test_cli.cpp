#include <catch_amalgamated.hpp>

#include "cli.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <sstream>

using namespace loadclust;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int         status = 0;
    std::string out;
    std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
    std::vector<std::string> storage{"loadclust"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : storage) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int          status = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

class Workdir {
public:
    Workdir() {
        static int counter = 0;
        root_ = fs::temp_directory_path() / ("loadclust-cli-" + std::to_string(::getpid()) + "-" + std::to_string(++counter));
        fs::create_directories(root_);
    }
    ~Workdir() { fs::remove_all(root_); }
    [[nodiscard]] std::string operator/(const std::string& name) const { return (root_ / name).string(); }

private:
    fs::path root_;
};

std::string slurp(const std::string& path) { return io::read_file(path); }

/// Writes the default 3-archetype synthetic set (seed 0) and returns its path.
std::string synth(const Workdir& dir, const std::string& name = "synth.csv", std::string seed = "0") {
    const auto path = dir / name;
    const auto r    = invoke({"synth", "-o", path, "--seed", seed});
    REQUIRE(r.status == 0);
    return path;
}

}  // namespace

TEST_CASE("invalid flag combinations are rejected before any work", "[cli][validation]") {
    Workdir    dir;
    const auto input  = synth(dir);
    const auto output = dir / "out.json";

    const std::vector<std::vector<std::string>> bad{
        {"cluster", "-i", input, "-o", output, "--method", "ahc", "--distance", "euclidean", "--window", "4", "--k", "3"},
        {"cluster", "-i", input, "-o", output, "--method", "kmeans", "--linkage", "single", "--k", "3"},
        {"cluster", "-i", input, "-o", output, "--method", "kmeans", "--distance", "dtw", "--k", "3"},
        {"cluster", "-i", input, "-o", output, "--method", "ahc", "--covariance", "full", "--k", "3"},
        {"cluster", "-i", input, "-o", output, "--linkage", "single", "--average-mode", "size-weighted", "--k", "3"},
        {"cluster", "-i", input, "-o", output, "--normalization", "raw", "--k", "3"},
        {"cluster", "-i", input, "-o", output, "--k", "1"},
        {"cluster", "-i", input, "-o", output, "--method", "ahc,kmeans", "--k", "3"},
        {"cluster", "-i", input, "-o", output, "--method", "kmeans", "--dendrogram", dir / "d.csv", "--k", "3"},
        {"cluster", "-i", input, "-o", output, "--method", "wards", "--k", "3"},
        {"cluster", "-i", input, "-o", output, "--window", "0", "--k", "3"},
        {"sweep", "-i", input, "-o", output, "--k-min", "5", "--k-max", "4"},
        {"sweep", "-i", input, "-o", output, "--method", "ahc,kmeans", "--k-max", "4", "--save-matrix", dir / "m"},
    };
    for (const auto& args : bad) {
        const auto r = invoke(args);
        INFO(r.err);
        CHECK(r.status != 0);
        CHECK(r.err.rfind("error: ", 0) == 0);
        CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
        CHECK_FALSE(fs::exists(output));
    }

    const auto window = invoke({"cluster", "-i", input, "-o", output, "--method", "ahc", "--distance", "euclidean",
                                "--window", "4", "--k", "3"});
    CHECK(window.err.find("--window") != std::string::npos);
}

TEST_CASE("synth then cluster recovers the archetypes", "[cli][end-to-end]") {
    Workdir    dir;
    const auto input = synth(dir);
    const auto r     = invoke({"cluster", "-i", input, "-o", dir / "result.json", "--method", "ahc", "--distance", "dtw",
                               "--window", "4", "--linkage", "average", "--k", "3", "--dendrogram", dir / "tree.csv"});
    REQUIRE(r.status == 0);
    CHECK(r.out.rfind("wcbcr=", 0) == 0);

    const auto result   = io::Json::parse(slurp(dir / "result.json"));
    const auto manifest = io::Json::parse(slurp(input + ".manifest.json"));
    const auto labels   = manifest["labels"].get<std::vector<std::size_t>>();
    CHECK(oracle::best_match_accuracy(labels, result["assignments"].get<std::vector<std::size_t>>()) == 1.0);
    CHECK(result["config"]["command"] == "cluster");
    CHECK(result["config"]["methods"][0]["metric"]["window"] == 4);
    CHECK(result["config"]["normalization"] == "per-curve");
    CHECK(result.contains("wcbcr"));

    std::istringstream tree(slurp(dir / "tree.csv"));
    const auto         merges = io::read_dendrogram_csv(tree);
    REQUIRE(merges.size() == 29);
    for (std::size_t s = 1; s < merges.size(); ++s) CHECK(merges[s].height >= merges[s - 1].height);
}

TEST_CASE("every method runs through the CLI", "[cli][end-to-end]") {
    Workdir    dir;
    const auto input = synth(dir);
    for (const char* method : {"ahc", "kmeans", "kmeanspp", "kmedoids", "gmm"}) {
        const auto r = invoke({"cluster", "-i", input, "-o", dir / "r.json", "--method", method, "--k", "3"});
        INFO(method << ": " << r.err);
        CHECK(r.status == 0);
        const auto j = io::Json::parse(slurp(dir / "r.json"));
        CHECK(j["method"]["algorithm"] == method);
        CHECK(j["prototypes"].size() == 3);
    }
    const auto full = invoke({"cluster", "-i", input, "-o", dir / "g.json", "--method", "gmm", "--covariance", "full",
                              "--k", "3"});
    CHECK(full.status == 0);
    CHECK(io::Json::parse(slurp(dir / "g.json"))["config"]["methods"][0]["covariance"] == "full");
}

TEST_CASE("repeated commands write identical bytes", "[cli][determinism]") {
    Workdir dir;
    auto    twice = [&](const std::vector<std::string>& args, const std::vector<std::string>& artifacts) {
        std::vector<std::string> first;
        REQUIRE(invoke(args).status == 0);
        for (const auto& a : artifacts) first.push_back(slurp(a));
        REQUIRE(invoke(args).status == 0);
        for (std::size_t i = 0; i < artifacts.size(); ++i) CHECK(slurp(artifacts[i]) == first[i]);
    };
    const auto input = synth(dir);
    twice({"synth", "-o", dir / "s2.csv", "--seed", "4", "--noise", "0.2"}, {dir / "s2.csv", dir / "s2.csv.manifest.json"});
    twice({"cluster", "-i", input, "-o", dir / "c.json", "--k", "4", "--dendrogram", dir / "t.csv", "--save-matrix",
           dir / "m.txt"},
          {dir / "c.json", dir / "t.csv", dir / "m.txt"});
    twice({"cluster", "-i", input, "-o", dir / "g.json", "--method", "gmm", "--k", "3", "--seed", "9"}, {dir / "g.json"});
    twice({"sweep", "-i", input, "-o", dir / "sw.csv", "--method", "kmeanspp", "--k-max", "6"},
          {dir / "sw.csv", dir / "sw.csv.json"});
    twice({"sweep", "-i", input, "-o", dir / "tab.csv", "--method", "kmedoids,kmeans,kmeanspp,gmm,ahc", "--k-max", "8"},
          {dir / "tab.csv", dir / "tab.csv.json"});
}

TEST_CASE("cached matrix gives the same results as a cold run", "[cli][matrix]") {
    Workdir    dir;
    const auto input = synth(dir);
    for (const char* method : {"ahc", "kmedoids"}) {
        INFO(method);
        REQUIRE(invoke({"cluster", "-i", input, "-o", dir / "cold.json", "--method", method, "--k", "3",
                        "--save-matrix", dir / "m.txt"})
                    .status == 0);
        REQUIRE(invoke({"cluster", "-i", input, "-o", dir / "warm.json", "--method", method, "--k", "3",
                        "--load-matrix", dir / "m.txt"})
                    .status == 0);
        CHECK(slurp(dir / "cold.json") == slurp(dir / "warm.json"));
    }
    REQUIRE(invoke({"sweep", "-i", input, "-o", dir / "cold.csv", "--k-max", "6", "--save-matrix", dir / "m.txt"})
                .status == 0);
    REQUIRE(invoke({"sweep", "-i", input, "-o", dir / "warm.csv", "--k-max", "6", "--load-matrix", dir / "m.txt"})
                .status == 0);
    CHECK(slurp(dir / "cold.csv") == slurp(dir / "warm.csv"));
    CHECK(slurp(dir / "cold.csv.json") == slurp(dir / "warm.csv.json"));

    // A cache built under another metric is refused.
    const auto wrong = invoke({"cluster", "-i", input, "-o", dir / "x.json", "--distance", "dtw", "--window", "6",
                               "--k", "3", "--load-matrix", dir / "m.txt"});
    CHECK(wrong.status != 0);
    CHECK(wrong.err.find("metric") != std::string::npos);
}

TEST_CASE("ingest reshapes readings and leaves the input alone", "[cli][ingest]") {
    Workdir                 dir;
    std::vector<RawReading> readings;
    for (int day = 1; day <= 3; ++day)
        for (int h = 0; h < 24; ++h) readings.push_back({"house7", {2023, 1, static_cast<unsigned>(day)}, h, 0.5 + 0.1 * h * day});
    readings.pop_back();  // day 3 loses hour 23
    const auto path = dir / "readings.csv";
    io::write_file(path, io::readings_csv(readings));
    const auto before = slurp(path);

    const auto r = invoke({"ingest", "-i", path, "-o", dir / "curves.csv"});
    REQUIRE(r.status == 0);
    CHECK(r.out == "curves=2 dropped_days=1\n");
    CHECK(slurp(path) == before);

    const auto [curves, manifest] = io::load_curves(dir / "curves.csv");
    CHECK(curves.normalization == Normalization::raw);
    CHECK(manifest.dropped_days == 1u);
    CHECK(curves.curves[1].values[23] == 0.5 + 0.1 * 23 * 2);

    // Clustering the ingested raw curves normalizes them on the way in.
    const auto c = invoke({"cluster", "-i", dir / "curves.csv", "-o", dir / "r.json", "--method", "kmedoids", "--k", "2"});
    CHECK(c.status == 0);

    const auto norm = invoke({"ingest", "-i", path, "-o", dir / "z.csv", "--normalization", "per-hour"});
    REQUIRE(norm.status == 0);
    CHECK(io::load_curves(dir / "z.csv").first.normalization == Normalization::per_hour);
    // Already per-hour input cannot be re-normalized per-curve.
    const auto clash = invoke({"cluster", "-i", dir / "z.csv", "-o", dir / "r.json", "--normalization", "per-curve",
                               "--method", "kmeans", "--k", "2"});
    CHECK(clash.status != 0);
}

TEST_CASE("inputs are never modified", "[cli][ingest]") {
    Workdir    dir;
    const auto input    = synth(dir);
    const auto csv      = slurp(input);
    const auto manifest = slurp(input + ".manifest.json");
    REQUIRE(invoke({"cluster", "-i", input, "-o", dir / "r.json", "--k", "3"}).status == 0);
    REQUIRE(invoke({"sweep", "-i", input, "-o", dir / "s.csv", "--k-max", "5", "--method", "gmm"}).status == 0);
    REQUIRE(invoke({"elbow", "-i", dir / "s.csv"}).status == 0);
    CHECK(slurp(input) == csv);
    CHECK(slurp(input + ".manifest.json") == manifest);
}

TEST_CASE("sweep and elbow agree", "[cli][sweep]") {
    Workdir    dir;
    const auto input = synth(dir);
    const auto s     = invoke({"sweep", "-i", input, "-o", dir / "sweep.csv", "--k-min", "2", "--k-max", "8"});
    REQUIRE(s.status == 0);
    CHECK(s.out == "elbow_k=3\n");
    const auto meta = io::Json::parse(slurp(dir / "sweep.csv.json"));
    CHECK(meta["elbow_k"] == 3);
    CHECK(meta["evaluation_metric"] == "euclidean");
    CHECK(meta["config"]["k_max"] == 8);

    const auto e = invoke({"elbow", "-i", dir / "sweep.csv"});
    CHECK(e.status == 0);
    CHECK(e.out == "3\n");

    io::write_file(dir / "flat.csv", "k,wcbcr\n2,3\n3,2\n4,1\n");
    const auto flat = invoke({"elbow", "-i", dir / "flat.csv"});
    CHECK(flat.out == "2\n");
    CHECK(flat.err.find("warning") != std::string::npos);

    io::write_file(dir / "broken.csv", "k,wcbcr\n2,3\n3,oops\n");
    const auto broken = invoke({"elbow", "-i", dir / "broken.csv"});
    CHECK(broken.status != 0);
    CHECK(broken.err.find("broken.csv:3") != std::string::npos);
}

TEST_CASE("multi-method sweep writes the wide table", "[cli][sweep]") {
    Workdir    dir;
    const auto input = synth(dir);
    const auto r     = invoke({"sweep", "-i", input, "-o", dir / "table.csv", "--method", "kmedoids,kmeans,kmeanspp,gmm,ahc",
                               "--k-max", "8"});
    REQUIRE(r.status == 0);
    std::istringstream table(slurp(dir / "table.csv"));
    std::string        line;
    std::getline(table, line);
    CHECK(line == "k,kmedoids,kmeans,kmeanspp,gmm,ahc_dtw_average");
    std::size_t rows = 0;
    while (std::getline(table, line)) {
        ++rows;
        CHECK(io::split_csv(line).size() == 6);
    }
    CHECK(rows == 7);
    const auto meta = io::Json::parse(slurp(dir / "table.csv.json"));
    CHECK(meta["columns"].size() == 5);
}

TEST_CASE("artifacts re-emit to the same bytes", "[cli][round-trip]") {
    Workdir    dir;
    const auto input = synth(dir);
    REQUIRE(invoke({"cluster", "-i", input, "-o", dir / "r.json", "--k", "3", "--dendrogram", dir / "t.csv",
                    "--save-matrix", dir / "m.txt"})
                .status == 0);
    REQUIRE(invoke({"sweep", "-i", input, "-o", dir / "s.csv", "--k-max", "6"}).status == 0);

    const auto [curves, manifest] = io::load_curves(input);
    CHECK(io::curves_csv(curves) == slurp(input));
    CHECK(io::to_json(manifest).dump(2) + '\n' == slurp(input + ".manifest.json"));

    const auto result_text = slurp(dir / "r.json");
    CHECK(io::Json::parse(result_text).dump(2) + '\n' == result_text);
    auto result_json = io::Json::parse(result_text);
    const auto core  = io::to_json(io::result_from_json(result_json));
    for (const auto& [key, value] : core.items()) CHECK(result_json[key] == value);

    std::istringstream tree(slurp(dir / "t.csv"));
    Dendrogram         d;
    d.merges = io::read_dendrogram_csv(tree);
    CHECK(io::dendrogram_csv(d) == slurp(dir / "t.csv"));

    std::istringstream matrix(slurp(dir / "m.txt"));
    CHECK(io::matrix_text(io::read_matrix(matrix)) == slurp(dir / "m.txt"));

    std::istringstream sweep(slurp(dir / "s.csv"));
    CHECK(io::sweep_csv(io::read_sweep_csv(sweep)) == slurp(dir / "s.csv"));
    const auto meta = slurp(dir / "s.csv.json");
    CHECK(io::Json::parse(meta).dump(2) + '\n' == meta);
}

TEST_CASE("missing files and corrupt input fail cleanly", "[cli][errors]") {
    Workdir dir;
    CHECK(invoke({"cluster", "-i", dir / "nope.csv", "-o", dir / "r.json", "--k", "2"}).status != 0);
    CHECK(invoke({"cluster"}).status != 0);

    const auto input = synth(dir);
    auto       text  = slurp(input);
    text.replace(text.find("\n", text.find("\n") + 1) + 1, 9, "bad,row\n");
    io::write_file(dir / "corrupt.csv", text);
    fs::copy_file(input + ".manifest.json", dir / "corrupt.csv.manifest.json");
    const auto r = invoke({"cluster", "-i", dir / "corrupt.csv", "-o", dir / "r.json", "--k", "2"});
    CHECK(r.status != 0);
    CHECK(r.err.find("corrupt.csv:3") != std::string::npos);

    // Two identical curves: every prototype coincides.
    Dataset   twins;
    LoadCurve c;
    c.household_id = "t";
    c.date         = {2020, 1, 1};
    for (std::size_t h = 0; h < 24; ++h) c.values[h] = static_cast<double>(h % 5);
    twins.curves = {c, c, c};
    io::save_curves(dir / "twins.csv", twins, io::manifest_for(twins));
    const auto degenerate = invoke({"cluster", "-i", dir / "twins.csv", "-o", dir / "r.json", "--k", "2"});
    CHECK(degenerate.status != 0);
    CHECK(degenerate.err.find("coincide") != std::string::npos);
}

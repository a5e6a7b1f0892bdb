#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "sera/dataset.hpp"
#include "synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("seraboost_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    fs::path file(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const TempDir& dir, const std::string& args) {
    const fs::path out = dir.file("stdout.txt");
    const fs::path err = dir.file("stderr.txt");
    const std::string cmd = std::string(SERABOOST_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_fixture(const TempDir& dir, const std::string& name,
                       const std::string& text) {
    const fs::path p = dir.file(name);
    std::ofstream f(p);
    f << text;
    return p;
}

// Compact sample: no value reaches the fences, so no rare instances.
std::string no_outlier_csv() {
    std::string text = "x,y\n";
    for (int i = 1; i <= 20; ++i)
        text += std::to_string(i) + "," + std::to_string(i) + "\n";
    return text;
}

} // namespace

TEST_CASE("unknown flags exit with code 2") {
    TempDir dir;
    const RunResult r = run_cli(dir, "profile --bogus 1");
    CHECK(r.exit_code == 2);
    CHECK(!r.err.empty());
}

TEST_CASE("computation failures exit with code 1 and a diagnostic") {
    TempDir dir;
    const RunResult r =
        run_cli(dir, "profile --data " + dir.file("missing.csv").string() +
                         " --target y");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
    TempDir dir;
    CHECK(run_cli(dir, "--help").exit_code == 0);
}

TEST_CASE("profile reports ir = 0 when nothing is rare") {
    TempDir dir;
    const fs::path data = write_fixture(dir, "compact.csv", no_outlier_csv());
    const RunResult r =
        run_cli(dir, "profile --data " + data.string() + " --target y");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["ir"] == 0.0);
    CHECK(j["n_rare"] == 0);
    CHECK(j["n_rows"] == 20);
    CHECK(j["type"] == "both");
}

TEST_CASE("profile honors the type override") {
    TempDir dir;
    const fs::path data = write_fixture(dir, "compact.csv", no_outlier_csv());
    const RunResult r = run_cli(
        dir, "profile --data " + data.string() + " --target y --type high");
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(r.out)["type"] == "high");
}

TEST_CASE("relevance exports a curve over the padded target range") {
    TempDir dir;
    const sera::Dataset ds = synth::lognormal_benchmark(150, 60);
    synth::write_csv(ds, dir.file("data.csv").string());
    const fs::path out = dir.file("phi.csv");
    const RunResult r =
        run_cli(dir, "relevance --data " + dir.file("data.csv").string() +
                         " --target y --points 50 --out " + out.string());
    REQUIRE(r.exit_code == 0);

    std::ifstream in(out);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "y,phi");
    std::size_t rows = 0;
    double first_y = 0.0, last_y = 0.0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        const double yv = std::strtod(line.substr(0, comma).c_str(), nullptr);
        const double phi = std::strtod(line.substr(comma + 1).c_str(), nullptr);
        CHECK(phi >= 0.0);
        CHECK(phi <= 1.0);
        if (rows == 0) first_y = yv;
        last_y = yv;
        ++rows;
    }
    CHECK(rows == 50);
    const auto [lo, hi] = std::minmax_element(ds.target.begin(), ds.target.end());
    const double range = *hi - *lo;
    CHECK(first_y == doctest::Approx(*lo - 0.1 * range));
    CHECK(last_y == doctest::Approx(*hi + 0.1 * range));
}

TEST_CASE("tune emits the best CvResult with fold scores") {
    TempDir dir;
    synth::write_csv(synth::lognormal_benchmark(80, 61), dir.file("data.csv").string());
    write_fixture(dir, "grid.json",
                  R"([{"nrounds": 10, "max_depth": 2, "eta": 0.3},
                      {"nrounds": 12, "max_depth": 3, "eta": 0.2}])");
    const RunResult r = run_cli(
        dir, "tune --data " + dir.file("data.csv").string() +
                 " --target y --objective sera --grid " +
                 dir.file("grid.json").string() + " --folds 5 --seed 3");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["objective"] == "sera");
    CHECK(j["fold_scores_sera"].size() == 5);
    CHECK(j["fold_scores_mse"].size() == 5);
    CHECK(j["all"].size() == 2);
    double best = j["mean_sera"].get<double>();
    for (const auto& cand : j["all"])
        CHECK(best <= cand["mean_sera"].get<double>());
}

TEST_CASE("experiment writes the record and its side files") {
    TempDir dir;
    synth::write_csv(synth::lognormal_benchmark(120, 62),
                     dir.file("data.csv").string());
    write_fixture(dir, "config.json",
                  R"({"grid": [{"nrounds": 10, "max_depth": 2, "eta": 0.3}],
                      "folds": 5, "T": 200})");
    const fs::path out_dir = dir.file("results");
    const RunResult r = run_cli(
        dir, "experiment --data " + dir.file("data.csv").string() +
                 " --target y --config " + dir.file("config.json").string() +
                 " --seed 11 --out " + out_dir.string());
    REQUIRE(r.exit_code == 0);

    const json record = json::parse(slurp(out_dir / "record.json"));
    CHECK(record == json::parse(r.out));
    CHECK(record["oos"]["mse"]["mse"].is_number());
    CHECK(record["oos"]["sera"]["sera"].is_number());
    CHECK(record["best"]["mse"]["cv_scores"]["sera"].size() == 5);
    CHECK(record["best"]["sera"]["cv_scores"]["sera"].size() == 5);

    for (const std::string tag : {"mse", "sera"}) {
        const fs::path preds = out_dir / ("predictions_" + tag + ".csv");
        const fs::path curve = out_dir / ("curve_" + tag + ".csv");
        REQUIRE(fs::exists(preds));
        REQUIRE(fs::exists(curve));
        CHECK(record["predictions"][tag] == preds.string());
        CHECK(record["curves"][tag] == curve.string());

        std::ifstream in(curve);
        std::string header;
        std::getline(in, header);
        CHECK(header == "t,ser");
        std::size_t rows = 0;
        for (std::string line; std::getline(in, line);) ++rows;
        CHECK(rows == 201); // T = 200 cutoffs plus t_0
    }
}

TEST_CASE("compare runs the Bayes sign test over stored records") {
    TempDir dir;
    synth::write_csv(synth::lognormal_benchmark(120, 63),
                     dir.file("data.csv").string());
    write_fixture(dir, "config.json",
                  R"({"grid": [{"nrounds": 10, "max_depth": 2, "eta": 0.3}],
                      "folds": 5, "T": 200})");
    for (int seed : {5, 6}) {
        const RunResult r = run_cli(
            dir, "experiment --data " + dir.file("data.csv").string() +
                     " --target y --config " + dir.file("config.json").string() +
                     " --seed " + std::to_string(seed) + " --out " +
                     dir.file("run" + std::to_string(seed)).string());
        REQUIRE(r.exit_code == 0);
    }
    const RunResult r = run_cli(
        dir, "compare --records " + dir.file("run5/record.json").string() + " " +
                 dir.file("run6/record.json").string() +
                 " --metric sera --rope 0.01 --samples 20000 --seed 1");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["z"].size() == 2);
    const double total = j["p_left"].get<double>() + j["p_rope"].get<double>() +
                         j["p_right"].get<double>();
    CHECK(std::fabs(total - 1.0) <= 1e-9);

    const RunResult again = run_cli(
        dir, "compare --records " + dir.file("run5/record.json").string() + " " +
                 dir.file("run6/record.json").string() +
                 " --metric sera --rope 0.01 --samples 20000 --seed 1");
    CHECK(json::parse(again.out)["p_left"] == j["p_left"]);
}

TEST_CASE("deriv-check reports near-zero differences and timings") {
    TempDir dir;
    synth::write_csv(synth::lognormal_benchmark(200, 64),
                     dir.file("data.csv").string());
    const RunResult r = run_cli(dir, "deriv-check --data " +
                                         dir.file("data.csv").string() +
                                         " --target y --seed 2");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["n"] == 200);
    CHECK(j["T"] == 1000);
    CHECK(j["max_abs_grad_diff"].get<double>() <= 1e-9);
    CHECK(j["max_abs_hess_diff"].get<double>() <= 1e-9);
    CHECK(j["max_rel_grad_vs_fd"].get<double>() <= 1e-6);
    CHECK(j["time_closed_s"].get<double>() >= 0.0);
    CHECK(j["time_direct_s"].get<double>() >= 0.0);
}

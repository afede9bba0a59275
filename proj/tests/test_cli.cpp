#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using lgnn::cli::run_cli;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("lgnn_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"train", "--no-such-flag"}).code == 2);
    CHECK(run({"train", "--help"}).code == 0);
}

TEST_CASE("runtime errors exit 1 with a structured line") {
    const Result r = run({"train", "--config", "/nonexistent/config.json", "--quiet"});
    CHECK(r.code == 1);
    const json e = json::parse(r.err.substr(0, r.err.find('\n')));
    CHECK(e["error"]["kind"] == "io");

    const fs::path dir = scratch("badcfg");
    std::ofstream(dir / "c.json") << R"({"graph": {"p": 1.5}})";
    const Result bad = run({"predict", "--config", (dir / "c.json").string(), "--quiet"});
    CHECK(bad.code == 1);
    CHECK(json::parse(bad.err.substr(0, bad.err.find('\n')))["error"]["kind"] == "parameter");
    fs::remove_all(dir);
}

TEST_CASE("gen-graph writes edges and metadata") {
    const fs::path dir = scratch("gen");
    const Result r = run({"gen-graph", "--model", "knn", "--n", "8", "--k", "4", "--out", (dir / "g").string(), "--quiet"});
    CHECK(r.code == 0);
    const std::string edges = slurp(dir / "g" / "edges.csv");
    CHECK(std::count(edges.begin(), edges.end(), '\n') == 17);
    const json meta = json::parse(slurp(dir / "g" / "graph.json"));
    CHECK(meta["edges"] == 16);
    fs::remove_all(dir);
}

TEST_CASE("predict with zero labels gives a = 1") {
    const fs::path dir = scratch("predict");
    {
        std::ofstream labels(dir / "y.csv");
        for (int i = 0; i < 30; ++i) labels << (i ? ",0" : "0");
        labels << "\n";
    }
    std::ofstream(dir / "c.json") << R"({"graph": {"model": "er", "n": 30, "p": 0.2}, "d_x": 4, "labels_csv": ")"
                                  << (dir / "y.csv").string() << R"("})";
    const Result r = run({"predict", "--config", (dir / "c.json").string(), "--quiet"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["min_admissible_a"].get<double>() == doctest::Approx(1.0));
    CHECK(j["iterations_to_epsilon"] == 0);
    fs::remove_all(dir);
}

TEST_CASE("train from a valid start stays under the bound") {
    const fs::path dir = scratch("train");
    std::ofstream(dir / "c.json") << R"({"graph": {"model": "er", "n": 60, "p": 0.15}, "d_x": 5, "hidden": [8, 8],
        "dynamics": {"method": "flow", "t_max": 1e9, "tol": 1e-6}, "seed": 3})";
    const Result r = run({"train", "--config", (dir / "c.json").string(), "--out", (dir / "o").string(), "--quiet"});
    REQUIRE(r.code == 0);
    const json s = json::parse(r.out);
    CHECK(s["init_valid"] == true);
    CHECK(s["status"] == "converged");
    CHECK(s["bound_ok"] == true);
    CHECK(s["ball_ok"] == true);
    CHECK(s["final_rel_loss"].get<double>() <= s["bound_at_final_t"].get<double>() * (1 + 1e-6));
    for (const char* f : {"config.json", "init_report.json", "trajectory.csv", "summary.json"}) {
        CHECK(fs::exists(dir / "o" / f));
    }
    fs::remove_all(dir);
}

TEST_CASE("the tool binary is byte-reproducible") {
    const fs::path dir = scratch("repro");
    std::ofstream(dir / "c.json") << R"({"graph": {"model": "ba", "n": 40, "m": 2}, "d_x": 4, "hidden": [6, 6],
        "shifts": ["adj", "nlap"], "n_bar": [20, 30], "replications": 2, "jobs": 2,
        "dynamics": {"tol": 1e-5}, "write_trajectories": true})";
    for (const char* run_dir : {"a", "b"}) {
        const std::string cmd = std::string(LGNN_TOOL_PATH) + " sweep --quiet --config " + (dir / "c.json").string() +
                                " --out " + (dir / run_dir).string() + " > /dev/null";
        REQUIRE(std::system(cmd.c_str()) == 0);
    }
    CHECK(slurp(dir / "a" / "convergence.csv") == slurp(dir / "b" / "convergence.csv"));
    CHECK(slurp(dir / "a" / "trajectories" / "row_0.csv") == slurp(dir / "b" / "trajectories" / "row_0.csv"));
    CHECK(!slurp(dir / "a" / "convergence.csv").empty());
    fs::remove_all(dir);
}

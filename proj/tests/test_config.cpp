#include "doctest.h"
#include "lgnn/error.hpp"
#include "lgnn/experiments.hpp"

using namespace lgnn;

TEST_CASE("defaults and overrides") {
    const ExperimentConfig d = parse_config("{}");
    CHECK(d.graph.model == "er");
    CHECK(d.dynamics.options.scheme == FlowScheme::Midpoint);
    CHECK(d.graph_seed() == 1);
    CHECK(d.label_seed(0, 0) == 2);

    const ExperimentConfig c = parse_config(R"({
        "graph": {"model": "sbm", "n1": 10, "n2": 20, "p": 0.4, "q": 0.1, "seed": 77},
        "graph_sweep": {"param": "q", "values": [0.01, 0.02]},
        "shifts": ["lap", "nsl-adj"],
        "d_x": 7, "depth": 3, "hidden": [9, 8, 8],
        "n_bar": [5, 10],
        "init": {"scheme": "theorem", "a": 2.5},
        "dynamics": {"method": "descent", "scheme": "euler", "eta": "auto", "k_max": 1000},
        "replications": 4, "seed": 10, "jobs": 2
    })");
    CHECK(c.graph.model == "sbm");
    CHECK(c.graph_seed() == 77);
    CHECK(c.graph_sweep->values.size() == 2);
    CHECK(c.shifts == std::vector<ShiftKind>{ShiftKind::Laplacian, ShiftKind::NormalizedSelfLoopAdjacency});
    CHECK(c.dims(1) == Dims{7, 9, 8, 8, 1});
    CHECK(c.n_bar_grid(30) == std::vector<int>{5, 10});
    CHECK(*c.init.a == 2.5);
    CHECK(c.dynamics.method == "descent");
    CHECK(c.dynamics.options.scheme == FlowScheme::Euler);
    CHECK_FALSE(c.dynamics.eta.has_value());
    CHECK(c.label_seed(1, 3) == 10 + 2 + 4 + 3);
}

TEST_CASE("round trip through json") {
    const ExperimentConfig c = parse_config(R"({"graph": {"model": "knn", "n": 50, "k": 6}, "d_x": 4,
        "dynamics": {"method": "normalized-flow", "t_max": 12.5, "scheme": "euler"}, "init": {"a": "auto"}})");
    const std::string text = config_to_json(c);
    CHECK(config_to_json(parse_config(text)) == text);
}

TEST_CASE("rejections") {
    CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), ParameterError);
    CHECK_THROWS_AS(parse_config(R"({"graph": {"model": "er", "nodes": 5}})"), ParameterError);
    CHECK_THROWS_AS(parse_config(R"({"dynamics": {"method": "sgd"}})"), ParameterError);
    CHECK_THROWS_AS(parse_config(R"({"dynamics": {"scheme": "rk4"}})"), ParameterError);
    CHECK_THROWS_AS(parse_config(R"({"shifts": ["laplacian"]})"), ParameterError);
    CHECK_THROWS_AS(parse_config(R"({"d_x": "ten"})"), ParameterError);
    CHECK_THROWS_AS(parse_config(R"({"replications": 0})"), ParameterError);
    CHECK_THROWS_AS(parse_config("{not json"), ParseError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
    const ExperimentConfig c = parse_config(R"({"depth": 2, "hidden": [4]})");
    CHECK_THROWS_AS(c.dims(1), ParameterError);
}

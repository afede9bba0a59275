#include <cmath>
#include <filesystem>
#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "lgnn/error.hpp"
#include "lgnn/experiments.hpp"
#include "lgnn/init.hpp"
#include "lgnn/linalg.hpp"

using namespace lgnn;
using lgnn::test::randn;

TEST_CASE("gaussian_features") {
    const Eigen::MatrixXd x = gaussian_features(30, 200, 5);
    CHECK(x == gaussian_features(30, 200, 5));
    CHECK_FALSE(x == gaussian_features(30, 200, 6));
    const double mean = x.mean();
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(30.0 * 200.0));
    const double var = (x.array() - mean).square().sum() / (x.size() - 1);
    CHECK(std::abs(var - 1.0) <= 0.1);
}

TEST_CASE("synthetic_labels") {
    const Eigen::MatrixXd x = randn(4, 6, 1);
    const Graph g = erdos_renyi(6, 0.5, 2);
    CHECK((synthetic_labels(x, g, 0.0) - x.colwise().sum()).norm() <= 1e-14);

    const Graph iso(4, {{0, 1}, {1, 2}});
    const Eigen::MatrixXd x4 = randn(3, 4, 3);
    CHECK(synthetic_labels(x4, iso, 0.7)(0, 3) == doctest::Approx(x4.col(3).sum()));

    const Graph tri(3, {{0, 1}, {0, 2}, {1, 2}});
    const Eigen::MatrixXd y = synthetic_labels(Eigen::MatrixXd::Identity(3, 3), tri, 0.1);
    for (int i = 0; i < 3; ++i) CHECK(y(0, i) == doctest::Approx(1.2));
}

TEST_CASE("sample_labeled_set") {
    const std::vector<int> all = sample_labeled_set(10, 10, 3);
    for (int i = 0; i < 10; ++i) CHECK(all[i] == i);
    CHECK_THROWS_AS(sample_labeled_set(10, 0, 1), ParameterError);
    CHECK_THROWS_AS(sample_labeled_set(10, 11, 1), ParameterError);

    const std::vector<int> s = sample_labeled_set(50, 20, 9);
    CHECK(s.size() == 20);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::set<int>(s.begin(), s.end()).size() == 20);
    CHECK(s == sample_labeled_set(50, 20, 9));

    // Overlap of two independent draws is hypergeometric with mean k^2 / n.
    const int n = 20, k = 5, draws = 1000;
    double sum = 0.0;
    std::vector<int> counts(n, 0);
    for (int d = 0; d < draws; ++d) {
        const auto a = sample_labeled_set(n, k, 2 * d);
        const auto b = sample_labeled_set(n, k, 2 * d + 1);
        std::vector<int> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        sum += static_cast<double>(common.size());
        for (int v : a) ++counts[v];
    }
    const double mean = static_cast<double>(k) * k / n;
    const double var = k * (double(k) / n) * (double(n - k) / n) * (double(n - k) / (n - 1));
    CHECK(std::abs(sum / draws - mean) <= 4.0 * std::sqrt(var / draws));
    // Each node is included with probability k / n.
    for (int c : counts) CHECK(std::abs(c - draws * k / double(n)) <= 4.0 * std::sqrt(draws * 0.25 * 0.75));
}

TEST_CASE("feature and matrix csv loaders") {
    const FeatureTable t = parse_features_csv("f,a,b\n1,3\n5,5\n2,-2\n", 2);
    CHECK(t.matrix.rows() == 3);
    CHECK(t.constant_rows == std::vector<int>{1});
    CHECK(t.matrix.row(1).isZero());
    for (int r : {0, 2}) {
        CHECK(t.matrix.row(r).mean() == doctest::Approx(0.0));
        CHECK(t.matrix.row(r).squaredNorm() / 2.0 == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(parse_features_csv("1,2,3\n", 2), ShapeError);
    try {
        parse_matrix_csv("1,2\n3,x\n", 2);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    const Eigen::MatrixXd m = parse_matrix_csv("1,2\n3,4\n", 2);
    CHECK(m(1, 0) == 3.0);

    const auto dir = std::filesystem::temp_directory_path() / "lgnn_test_csv";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "f.csv") << "1,2,3\n4,4,5\n";
    CHECK(load_features_csv(dir / "f.csv", 3).matrix.cols() == 3);
    CHECK_THROWS_AS(load_matrix_csv(dir / "missing.csv", 3), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("graph spec parameters") {
    GraphSpec g;
    g.set_param("p", 0.25);
    CHECK(g.p == 0.25);
    g.set_param("k", 6);
    CHECK(g.get_param("k") == 6.0);
    CHECK_THROWS_AS(g.set_param("k", 2.5), ParameterError);
    CHECK_THROWS_AS(g.set_param("zeta", 1.0), ParameterError);
}

TEST_CASE("sigma sweep at n_bar = n reproduces the unrestricted value") {
    ExperimentConfig cfg;
    cfg.graph.n = 60;
    cfg.d_x = 5;
    cfg.n_bar = {60};
    cfg.replications = 3;
    const auto rows = sigma_sweep(cfg);
    REQUIRE(rows.size() == 1);
    const Dataset data = make_dataset(cfg, cfg.graph);
    const ShiftMatrix s = build_shift(data.graph, ShiftKind::Adjacency);
    const double full = sigma_small(data.features * s.matrix * s.matrix).value;
    CHECK(rows[0].sigma_mean == doctest::Approx(full));
    CHECK(rows[0].sigma_min == doctest::Approx(full));
    CHECK(rows[0].predicted == doctest::Approx(full));
}

TEST_CASE("convergence sweep is deterministic and independent of jobs") {
    ExperimentConfig cfg;
    cfg.graph.n = 40;
    cfg.d_x = 4;
    cfg.hidden = {6, 6};
    cfg.shifts = {ShiftKind::Adjacency, ShiftKind::NormalizedSelfLoopAdjacency};
    cfg.graph_sweep = GraphSweep{"p", {0.1, 0.3}};
    cfg.replications = 2;
    cfg.dynamics.options.tol = 1e-6;
    const std::string one = convergence_table(convergence_sweep(cfg)).str();
    CHECK(one == convergence_table(convergence_sweep(cfg)).str());
    cfg.jobs = 3;
    CHECK(one == convergence_table(convergence_sweep(cfg)).str());
    const auto results = convergence_sweep(cfg);
    CHECK(results.size() == 2 * 2 * 2);
    for (const auto& r : results) {
        CHECK(r.row.error.empty());
        if (r.row.report.valid) {
            CHECK(r.row.bound_ok);
            CHECK(r.row.ball_ok);
        }
    }
}

TEST_CASE("exact-fit labels converge under a valid start") {
    const Graph g = erdos_renyi(60, 0.1, 3);
    const Eigen::MatrixXd x = gaussian_features(5, 60, 4);
    const ShiftMatrix s = build_shift(g, ShiftKind::NormalizedSelfLoopAdjacency);
    const std::vector<int> labeled = sample_labeled_set(60, 40, 5);
    Problem p(x, s, 2, Eigen::MatrixXd::Zero(1, 40), labeled);
    p = p.with_labels(randn(1, 5, 6) * p.restricted(), labeled);
    CHECK(global_min_loss(p).value <= 1e-20);
    const WeightStack w0 = theorem_init({5, 8, 8, 1}, 1.5 * min_admissible_a(p));
    REQUIRE(validate_init(w0, p).valid);
    DynamicsSpec spec;
    spec.t_max = 1e8;
    spec.options.tol = 1e-8;
    const Trajectory traj = run_dynamics(spec, w0, p);
    CHECK(traj.status == RunStatus::Converged);
    CHECK(traj.last().rel_loss <= 1e-8);
}

TEST_CASE("normalized laplacian trajectories depend less on the BA parameter than adjacency") {
    ExperimentConfig cfg;
    cfg.graph.model = "ba";
    cfg.graph.n = 100;
    cfg.d_x = 10;
    cfg.hidden = {16, 16};
    cfg.graph_sweep = GraphSweep{"m", {2, 4, 8}};
    cfg.shifts = {ShiftKind::Adjacency, ShiftKind::NormalizedLaplacian};
    cfg.init.a = 2.0;  // automatic a equalizes the rates across shifts
    cfg.dynamics.t_max = 1e9;
    cfg.dynamics.options.tol = 1e-4;
    cfg.time_to_level = 1e-3;
    const auto results = convergence_sweep(cfg);
    std::map<ShiftKind, std::vector<double>> times;
    for (const auto& r : results) {
        REQUIRE(r.row.time_to_level.has_value());
        times[r.row.shift].push_back(std::log10(*r.row.time_to_level));
    }
    auto spread = [](const std::vector<double>& v) {
        return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
    };
    const double ratio = spread(times[ShiftKind::NormalizedLaplacian]) / spread(times[ShiftKind::Adjacency]);
    MESSAGE("log10 time-to-1e-3 spread ratio nlap / adj = " << ratio);
    CHECK(ratio < 1.0);
}

TEST_CASE("parallel_for covers every index once") {
    std::vector<int> hits(97, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) CHECK(h == 1);
    parallel_for(0, 4, [&](std::size_t) { FAIL("no calls expected"); });
}

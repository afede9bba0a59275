#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "lgnn/dynamics.hpp"
#include "lgnn/error.hpp"
#include "lgnn/grad.hpp"
#include "lgnn/experiments.hpp"
#include "lgnn/init.hpp"
#include "lgnn/verify.hpp"

using namespace lgnn;

namespace {

// x = s = y = 1, H = 1, all dims 1: L = (w2 w1 - 1)^2, m = 1.
Problem scalar_toy() {
    return Problem(Eigen::MatrixXd::Ones(1, 1), custom_shift(Eigen::MatrixXd::Ones(1, 1)), 1, Eigen::MatrixXd::Ones(1, 1),
                   {0});
}

WeightStack scalar_stack(double w1, double w2) {
    return WeightStack({Eigen::MatrixXd::Constant(1, 1, w1), Eigen::MatrixXd::Constant(1, 1, w2)});
}

void check_well_formed(const Trajectory& traj) {
    REQUIRE(!traj.samples.empty());
    CHECK(traj.samples.front().t == 0.0);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        CHECK(traj.samples[i].t > traj.samples[i - 1].t);
        CHECK(traj.samples[i].loss <= traj.samples[i - 1].loss * (1 + 1e-14) + 1e-300);
    }
    CHECK(traj.monotone);
}

}  // namespace

TEST_CASE("zero-gradient starts stay put") {
    const Problem p = random_problem(1, 12, 3, 2, 2, ShiftKind::Adjacency, 8);
    const WeightStack zero = WeightStack::zeros({3, 3, 3, 2});
    REQUIRE(gradients(zero, p).max_abs() == 0.0);

    const Trajectory f = flow_integrate(zero, p, 5.0);
    CHECK(f.final_weights.squared_norm() == 0.0);
    CHECK(f.last().loss == f.loss0);
    CHECK(f.last().t == 5.0);
    const Trajectory nf = normalized_flow_integrate(zero, p, 5.0);
    CHECK(nf.final_weights.squared_norm() == 0.0);
    const Trajectory d = gradient_descent(zero, p, 0.1, 20);
    CHECK(d.final_weights.squared_norm() == 0.0);
    CHECK(d.last().loss == d.loss0);

    const WeightStack w = random_stack({3, 3, 3, 2}, 4);
    const Problem fit = p.with_labels(predict_labeled(w, p), p.labeled());
    const Trajectory at_min = flow_integrate(w, fit, 5.0);
    CHECK(at_min.status == RunStatus::Converged);
    CHECK(at_min.final_weights.squared_distance(w) == 0.0);
}

TEST_CASE("scalar flow against a fine reference integration") {
    const Problem p = scalar_toy();
    const double a = min_admissible_a(p);
    CHECK(a == doctest::Approx(4.0));
    const double t_end = 0.3;

    DynamicsOptions opts;
    opts.tol = 0.0;
    for (FlowScheme scheme : {FlowScheme::Midpoint, FlowScheme::Euler}) {
        opts.scheme = scheme;
        opts.h_max = 1e-3;
        const Trajectory traj = flow_integrate(scalar_stack(0.0, a), p, t_end, opts);
        CHECK(traj.last().t == t_end);

        // Classical RK4 at h = 1e-6.
        auto rhs = [](double w1, double w2, double& d1, double& d2) {
            const double r = w2 * w1 - 1.0;
            d1 = -2.0 * r * w2;
            d2 = -2.0 * r * w1;
        };
        double w1 = 0.0, w2 = a;
        const double h = 1e-6;
        const int steps = static_cast<int>(std::lround(t_end / h));
        for (int i = 0; i < steps; ++i) {
            double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
            rhs(w1, w2, k1a, k1b);
            rhs(w1 + 0.5 * h * k1a, w2 + 0.5 * h * k1b, k2a, k2b);
            rhs(w1 + 0.5 * h * k2a, w2 + 0.5 * h * k2b, k3a, k3b);
            rhs(w1 + h * k3a, w2 + h * k3b, k4a, k4b);
            w1 += h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
            w2 += h / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b);
        }
        const double ref_loss = (w1 * w2 - 1.0) * (w1 * w2 - 1.0);
        CHECK(traj.last().loss == doctest::Approx(ref_loss).epsilon(1e-4));
        CHECK(traj.final_weights.layer(0)(0, 0) == doctest::Approx(w1).epsilon(1e-4));
        CHECK(traj.final_weights.layer(1)(0, 0) == doctest::Approx(w2).epsilon(1e-4));
    }
}

TEST_CASE("normalized flow reaches the same minimum on the toy") {
    const Problem p = scalar_toy();
    DynamicsOptions opts;
    opts.tol = 1e-10;
    const Trajectory plain = flow_integrate(scalar_stack(0.0, 4.0), p, 100.0, opts);
    const Trajectory norm = normalized_flow_integrate(scalar_stack(0.0, 4.0), p, 100.0, opts);
    CHECK(plain.status == RunStatus::Converged);
    CHECK(norm.status == RunStatus::Converged);
    CHECK(norm.last().rel_loss <= 1e-10);
    CHECK(collapsed_product(norm.final_weights)(0, 0) == doctest::Approx(1.0).epsilon(1e-4));
    check_well_formed(plain);
    check_well_formed(norm);
}

TEST_CASE("descent iterates follow the hand recursion") {
    const Problem p = scalar_toy();
    DynamicsOptions opts;
    opts.tol = 0.0;
    const double eta = 0.01;
    const Trajectory traj = gradient_descent(scalar_stack(0.0, 4.0), p, eta, 40, opts);
    double w1 = 0.0, w2 = 4.0;
    REQUIRE(traj.samples.size() == 41);
    for (int k = 0; k < 40; ++k) {
        const double r = w2 * w1 - 1.0;
        const double n1 = w1 - eta * 2.0 * r * w2;
        const double n2 = w2 - eta * 2.0 * r * w1;
        w1 = n1;
        w2 = n2;
        const double l = (w1 * w2 - 1.0) * (w1 * w2 - 1.0);
        CHECK(std::abs(traj.samples[k + 1].loss - l) <= 1e-12);
        CHECK(traj.samples[k + 1].t == k + 1);
    }
    CHECK(std::abs(traj.final_weights.layer(0)(0, 0) - w1) <= 1e-12);
    CHECK(std::abs(traj.final_weights.layer(1)(0, 0) - w2) <= 1e-12);
}

TEST_CASE("forced divergent step size") {
    const Problem p = scalar_toy();
    const Trajectory traj = gradient_descent(scalar_stack(0.0, 4.0), p, 5.0, 50);
    CHECK(traj.status == RunStatus::BudgetExhausted);
    CHECK_FALSE(traj.monotone);
}

TEST_CASE("automatic descent contracts at the certified rate") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Problem p = random_problem(seed, 40, 5, 1, 2, ShiftKind::NormalizedSelfLoopAdjacency, 30);
        const Dims dims{5, 8, 8, 1};
        const WeightStack w0 = theorem_init(dims, min_admissible_a(p));
        const InitReport rep = validate_init(w0, p);
        REQUIRE(rep.valid);
        DynamicsOptions opts;
        opts.tol = 1e-8;
        const Trajectory traj = gradient_descent(w0, p, std::nullopt, 2'000'000, opts);
        CHECK(traj.status == RunStatus::Converged);
        CHECK(descent_bound_holds(traj, rep.alpha_lower));
        CHECK(traj.eta <= auto_step_size(w0, p, opts));
        check_well_formed(traj);
    }
}

TEST_CASE("flow from a valid start stays under the envelope and conserves balance") {
    const Problem p = random_problem(11, 40, 5, 2, 2, ShiftKind::Laplacian, 30);
    const Dims dims{5, 6, 6, 2};
    const WeightStack w0 = theorem_init(dims, min_admissible_a(p));
    const InitReport rep = validate_init(w0, p);
    REQUIRE(rep.valid);
    DynamicsOptions opts;
    opts.tol = 1e-8;
    const Trajectory traj = flow_integrate(w0, p, 1e12, opts);
    CHECK(traj.status == RunStatus::Converged);
    CHECK(flow_bound_holds(traj, rep.alpha_lower));
    CHECK(safety_ball_holds(traj, rep.r));
    check_well_formed(traj);

    const WeightStack& w1 = traj.final_weights;
    for (std::size_t l = 0; l + 1 < w0.num_layers(); ++l) {
        const Eigen::MatrixXd d0 = w0.layer(l) * w0.layer(l).transpose() - w0.layer(l + 1).transpose() * w0.layer(l + 1);
        const Eigen::MatrixXd d1 = w1.layer(l) * w1.layer(l).transpose() - w1.layer(l + 1).transpose() * w1.layer(l + 1);
        CHECK((d1 - d0).norm() <= 1e-8 * std::max(1.0, d0.norm()));
    }
}

TEST_CASE("iterations_to_epsilon") {
    InitReport rep;
    rep.alpha_lower = 1.0;
    CHECK(iterations_to_epsilon(rep, 1.0, 3.0, 1.0, 2.0) == 0);
    CHECK(iterations_to_epsilon(rep, 1.0, 3.0, 1.0, 1.0) == 1);
    CHECK(iterations_to_epsilon(rep, 1.0, 3.0, 1.0, 0.5) == 2);
    CHECK(iterations_to_epsilon(rep, 1.0, 3.0, 1.0, 0.3) == 3);
    CHECK(iterations_to_epsilon(rep, 0.2, 3.0, 1.0, 1e-3) ==
          static_cast<std::size_t>(std::ceil(std::log(2e3) / -std::log(0.9))));
    CHECK_THROWS_AS(iterations_to_epsilon(rep, 1.0, 3.0, 1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(iterations_to_epsilon(rep, 2.0, 3.0, 1.0, 0.1), ParameterError);
    CHECK_THROWS_AS(iterations_to_epsilon(rep, 0.0, 3.0, 1.0, 0.1), ParameterError);
}

TEST_CASE("sample thinning keeps the endpoints") {
    const Problem p = scalar_toy();
    DynamicsOptions opts;
    opts.tol = 0.0;
    opts.max_samples = 20;
    const Trajectory traj = gradient_descent(scalar_stack(0.0, 4.0), p, 0.001, 500, opts);
    CHECK(traj.samples.size() < 300);
    CHECK(traj.samples.size() > 20);
    CHECK(traj.last().t == 500.0);
    CHECK(traj.accepted_steps == 500);
}

TEST_CASE("scheme names") {
    CHECK(parse_flow_scheme("midpoint") == FlowScheme::Midpoint);
    CHECK(parse_flow_scheme(to_string(FlowScheme::Euler)) == FlowScheme::Euler);
    CHECK_THROWS_AS(parse_flow_scheme("rk4"), ParameterError);
    CHECK_THROWS_AS(flow_integrate(scalar_stack(0, 1), scalar_toy(), 0.0), ParameterError);
}

TEST_CASE("G(500) normalized versus plain flow at equal budgets (reported)") {
    const Graph g = erdos_renyi(500, 0.3, 1);
    const Eigen::MatrixXd x = gaussian_features(30, 500, 0);
    const Dataset data{g, x, synthetic_labels(x, g, 0.1)};
    const Problem p = make_problem(data, ShiftKind::Adjacency, 2, sample_labeled_set(500, 375, 2));
    const WeightStack w0 = theorem_init({30, 32, 32, 1}, min_admissible_a(p));
    DynamicsOptions opts;
    opts.max_steps = 4000;
    const Trajectory plain = flow_integrate(w0, p, 1e4, opts);
    const Trajectory norm = normalized_flow_integrate(w0, p, 1e4, opts);
    MESSAGE("plain: " << to_string(plain.status) << " rel_loss " << plain.last().rel_loss
                      << "; normalized: " << to_string(norm.status) << " rel_loss " << norm.last().rel_loss);
    CHECK(plain.status != RunStatus::StepUnderflow);
    CHECK(plain.monotone);
    CHECK(norm.monotone);
}

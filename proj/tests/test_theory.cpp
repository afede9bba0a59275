#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "lgnn/error.hpp"
#include "lgnn/gnn.hpp"
#include "lgnn/init.hpp"
#include "lgnn/linalg.hpp"
#include "lgnn/theory.hpp"
#include "lgnn/verify.hpp"

using namespace lgnn;
using lgnn::test::randn;

TEST_CASE("rate_bundle") {
    const Problem p = random_problem(2, 20, 4, 2, 2, ShiftKind::NormalizedSelfLoopAdjacency, 15);
    for (double a : {0.5, 3.0}) {
        const RateBundle b = rate_bundle(theorem_init({4, 5, 5, 2}, a), p);
        CHECK(b.beta == doctest::Approx(a * a / 4.0));
        CHECK(b.sigma_small_restricted == doctest::Approx(sigma_small(p.restricted()).value));
        CHECK(b.m == p.m());
        CHECK(b.alpha_lower == doctest::Approx(b.beta * b.sigma_small_restricted * b.sigma_small_restricted / p.m()));
        CHECK(b.descent_factor(0.1) == doctest::Approx(1.0 - 0.05 * b.alpha_lower));
    }

    const Eigen::MatrixXd s = p.shift().matrix;
    const Eigen::MatrixXd explicit_product = select_columns(p.features() * s * s, p.labeled());
    CHECK(rate_bundle(theorem_init({4, 5, 5, 2}, 1.0), p).sigma_small_restricted ==
          doctest::Approx(sigma_small(explicit_product).value).epsilon(1e-10));

    const Problem id(Eigen::MatrixXd::Identity(3, 3), custom_shift(Eigen::MatrixXd::Identity(3, 3)), 1, randn(1, 3, 1),
                     {0, 1, 2});
    CHECK(rate_bundle(theorem_init({3, 3, 1}, 1.0), id).sigma_small_restricted == doctest::Approx(1.0));
}

TEST_CASE("flow_bound_curve") {
    RateBundle b;
    b.alpha_lower = std::numbers::ln2;
    const auto curve = flow_bound_curve(b, 5.0, 1.0, {0.0, 1.0, 2.0});
    CHECK(curve[0].second == doctest::Approx(4.0));
    CHECK(curve[1].second == doctest::Approx(2.0));
    CHECK(curve[2].second == doctest::Approx(1.0));
    b.alpha_lower = 0.0;
    for (const auto& [t, v] : flow_bound_curve(b, 5.0, 1.0, {0.0, 10.0, 1e6})) CHECK(v == 4.0);
    CHECK_THROWS_AS(flow_bound_curve(b, 0.5, 1.0, {0.0}), ParameterError);
}

TEST_CASE("energy_min_value") {
    const Problem p = random_problem(3, 20, 4, 2, 1, ShiftKind::Adjacency, 15);
    const Problem zero = p.with_labels(Eigen::MatrixXd::Zero(2, 15), p.labeled());
    CHECK(energy_min_value(zero) == 0.0);

    CHECK(balanced_energy(Eigen::MatrixXd::Constant(1, 1, 4.0), 1) == doctest::Approx(8.0));

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Problem q = random_problem(seed, 20, 4, 2, 2, ShiftKind::NormalizedSelfLoopAdjacency, 15);
        const WeightStack w = balanced_init({4, 5, 5, 2}, min_norm_solution(q), q);
        CHECK(energy_min_value(q) == doctest::Approx(w.squared_norm()).epsilon(1e-8));
        CHECK(balanced_energy(min_norm_solution(q), 2) == doctest::Approx(w.squared_norm()).epsilon(1e-8));

        // Any other factorization of the same product costs at least as much.
        for (std::uint64_t k = 0; k < 5; ++k) {
            Eigen::MatrixXd g = randn(5, 5, seed * 10 + k);
            g.diagonal().array() += 3.0;
            const WeightStack v({w.layer(0), g * w.layer(1), w.layer(2) * g.inverse()});
            CHECK(v.squared_norm() >= energy_min_value(q) * (1 - 1e-10));
        }
    }
}

TEST_CASE("expected_sigma_small") {
    const Eigen::MatrixXd x = randn(5, 40, 3);
    const Eigen::MatrixXd s = erdos_renyi(40, 0.2, 1).adjacency_matrix();
    const ShiftMatrix shift = custom_shift(s);
    const double full = sigma_small(x * s * s).value;
    const SigmaPrediction all = expected_sigma_small(x, shift, 2, 40);
    CHECK(all.value == doctest::Approx(full));
    CHECK(all.in_regime);
    CHECK(expected_sigma_small(x, shift, 2, 20).value == doctest::Approx(full / 2));
    CHECK_FALSE(expected_sigma_small(x, shift, 2, 3).in_regime);
}

TEST_CASE("depth_scaling_estimate") {
    const Eigen::MatrixXd x = randn(4, 30, 5);
    const ShiftMatrix shift = build_shift(erdos_renyi(30, 0.2, 2), ShiftKind::NormalizedSelfLoopAdjacency);
    CHECK(depth_scaling_estimate(x, shift, 1) == doctest::Approx(sigma_small(x * shift.matrix).value));
    const ShiftMatrix id = custom_shift(Eigen::MatrixXd::Identity(30, 30));
    for (int h = 1; h <= 3; ++h) CHECK(depth_scaling_estimate(x, id, h) == doctest::Approx(sigma_small(x).value));
    CHECK_THROWS_AS(depth_scaling_estimate(randn(31, 30, 1), id, 2), ParameterError);

    for (int h = 1; h <= 3; ++h) {
        Eigen::MatrixXd sh = Eigen::MatrixXd::Identity(30, 30);
        for (int i = 0; i < h; ++i) sh = sh * shift.matrix;
        const double ratio = depth_scaling_estimate(x, shift, h) / sigma_small(x * sh).value;
        MESSAGE("depth " << h << ": estimate / true = " << ratio);
    }
}

TEST_CASE("eigenvalue_magnitudes are sorted") {
    const ShiftMatrix shift = build_shift(erdos_renyi(20, 0.3, 3), ShiftKind::Laplacian);
    const Eigen::VectorXd ev = eigenvalue_magnitudes(shift);
    CHECK(ev.size() == 20);
    for (int i = 1; i < ev.size(); ++i) CHECK(ev(i) <= ev(i - 1));
    CHECK(ev(ev.size() - 1) == doctest::Approx(0.0).epsilon(1e-10));
}

#include "lgnn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "lgnn/error.hpp"
#include "lgnn/init.hpp"
#include "lgnn/linalg.hpp"

namespace lgnn {

RateBundle rate_bundle(const WeightStack& w0, const Problem& prob) {
    prob.check_compatible(w0);
    RateBundle b;
    b.sigma_small_restricted = sigma_small(prob.restricted()).value;
    b.beta = init_beta(w0);
    b.m = prob.m();
    b.alpha_lower = b.beta * b.sigma_small_restricted * b.sigma_small_restricted / b.m;
    return b;
}

std::vector<std::pair<double, double>> flow_bound_curve(const RateBundle& bundle, double loss0, double loss_min,
                                                        const std::vector<double>& ts) {
    if (loss0 < loss_min) throw ParameterError("flow_bound_curve: initial loss below the global minimum");
    std::vector<std::pair<double, double>> out;
    out.reserve(ts.size());
    for (double t : ts) out.emplace_back(t, std::exp(-bundle.alpha_lower * t) * (loss0 - loss_min));
    return out;
}

double balanced_energy(const Eigen::MatrixXd& product, int depth) {
    if (product.size() == 0) return 0.0;
    const Eigen::VectorXd s = svd(product).sigma;
    const double power = 2.0 / (depth + 1);
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > 0.0) total += std::pow(s(i), power);
    }
    return (depth + 1) * total;
}

double energy_min_value(const Problem& prob, int depth) {
    if (depth < 1) throw ParameterError("energy_min_value: depth must be at least 1");
    return balanced_energy(min_norm_solution(prob), depth);
}

SigmaPrediction expected_sigma_small(const Eigen::MatrixXd& propagated, int n_bar) {
    const int n = static_cast<int>(propagated.cols());
    if (n_bar < 1 || n_bar > n) throw ParameterError("expected_sigma_small: n_bar must lie in [1, n]");
    const double full = sigma_small(propagated).value;
    return SigmaPrediction{static_cast<double>(n_bar) / n * full, n_bar >= propagated.rows()};
}

SigmaPrediction expected_sigma_small(const Eigen::MatrixXd& features, const ShiftMatrix& shift, int depth, int n_bar) {
    return expected_sigma_small(propagate(features, shift.matrix, depth), n_bar);
}

Eigen::VectorXd eigenvalue_magnitudes(const ShiftMatrix& shift) {
    Eigen::VectorXd mags;
    if (is_symmetric_kind(shift.kind) && shift.matrix.isApprox(shift.matrix.transpose())) {
        mags = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(shift.matrix, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs();
    } else {
        mags = Eigen::EigenSolver<Eigen::MatrixXd>(shift.matrix, false).eigenvalues().cwiseAbs();
    }
    std::sort(mags.data(), mags.data() + mags.size(), std::greater<>());
    return mags;
}

double depth_scaling_estimate(const Eigen::MatrixXd& features, const ShiftMatrix& shift, int depth) {
    if (depth < 1) throw ParameterError("depth_scaling_estimate: depth must be at least 1");
    const int d_x = static_cast<int>(features.rows());
    if (d_x > shift.size()) throw ParameterError("depth_scaling_estimate: d_x exceeds the number of nodes");
    const double base = sigma_small(features * shift.matrix).value;
    if (depth == 1) return base;
    const double lambda = eigenvalue_magnitudes(shift)(d_x - 1);
    return std::pow(lambda, depth - 1) * base;
}

}  // namespace lgnn

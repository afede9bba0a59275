#include "lgnn/init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgnn/error.hpp"
#include "lgnn/linalg.hpp"

namespace lgnn {

Eigen::MatrixXd rect_diagonal(int rows, int cols, double value) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    for (int i = 0; i < std::min(rows, cols); ++i) m(i, i) = value;
    return m;
}

WeightStack theorem_init(const Dims& dims, double a) {
    validate_dims(dims);
    if (!(a > 0.0)) throw ParameterError("theorem_init: a must be positive");
    const std::size_t layers = dims.size() - 1;
    std::vector<Eigen::MatrixXd> w;
    w.push_back(Eigen::MatrixXd::Zero(dims[1], dims[0]));
    for (std::size_t l = 2; l <= layers; ++l) {
        w.push_back(rect_diagonal(dims[l], dims[l - 1], l == layers ? a : 1.0));
    }
    return WeightStack(std::move(w));
}

double init_beta(const WeightStack& w) {
    double prod = 1.0;
    for (std::size_t l = 1; l < w.num_layers(); ++l) {
        const double s = sigma_min(w.layer(l));
        prod *= s * s;
    }
    return prod / std::pow(4.0, w.depth() - 1);
}

double min_admissible_a(const Problem& prob) {
    const double sigma = sigma_small(prob.restricted()).value;
    const double gap = prob.labels().squaredNorm() - global_min_loss(prob).value;
    const double need = std::pow(4.0, prob.depth() + 1) * prob.m() * gap / (sigma * sigma);
    return std::sqrt(std::max(1.0, need));
}

WeightStack balanced_init(const Dims& dims, const Eigen::MatrixXd& target, const Problem& prob) {
    validate_dims(dims);
    const int depth = static_cast<int>(dims.size()) - 2;
    const int d_x = dims.front();
    const int d_y = dims.back();
    if (depth != prob.depth() || d_x != prob.input_dim() || d_y != prob.output_dim()) {
        throw ParameterError("balanced_init: dims " + format_dims(dims) + " do not match the problem");
    }
    if (target.rows() != d_y || target.cols() != d_x) throw ParameterError("balanced_init: target must be d_y x d_x");
    for (int l = 1; l <= depth; ++l) {
        if (dims[l] < d_y) throw ParameterError("balanced_init: needs d_y <= every hidden width");
    }

    const double scale = std::max(1.0, target.norm());
    const Eigen::MatrixXd outside = target - target * column_space_projector(prob.restricted());
    if (outside.norm() > 1e-8 * scale) {
        throw ParameterError(
            "balanced_init: target rows leave the column space of the restricted features (W_1 U must vanish on the "
            "trailing singular directions)");
    }

    const SvdResult dec = svd(target);
    const int r = target.norm() == 0.0 ? 0 : dec.rank();
    const double power = 1.0 / (depth + 1);
    const Eigen::VectorXd root = dec.sigma.head(r).array().pow(power);

    std::vector<Eigen::MatrixXd> w;
    auto pad = [&](int rows) { return Eigen::MatrixXd::Identity(rows, r); };
    w.push_back(pad(dims[1]) * root.asDiagonal() * dec.V.leftCols(r).transpose());
    for (int l = 2; l <= depth; ++l) w.push_back(pad(dims[l]) * root.asDiagonal() * pad(dims[l - 1]).transpose());
    w.push_back(dec.U.leftCols(r) * root.asDiagonal() * pad(dims[depth]).transpose());
    return WeightStack(std::move(w));
}

InitReport validate_init(const WeightStack& w0, const Problem& prob) {
    prob.check_compatible(w0);
    InitReport rep;
    rep.beta = init_beta(w0);
    rep.r = std::numeric_limits<double>::infinity();
    for (std::size_t l = 1; l < w0.num_layers(); ++l) rep.r = std::min(rep.r, sigma_min(w0.layer(l)) / 2.0);
    const auto small = sigma_small(prob.restricted());
    rep.sigma_small = small.value;
    rep.alpha_lower = rep.beta * small.value * small.value / prob.m();
    rep.loss0 = loss(w0, prob);
    rep.loss_min = global_min_loss(prob).value;
    rep.condition_lhs = 4.0 * (rep.loss0 - rep.loss_min);
    rep.condition_rhs = rep.r * rep.r * rep.alpha_lower;
    rep.valid = rep.condition_lhs <= rep.condition_rhs;

    const double scale = std::max(1.0, w0.squared_norm());
    if (balancedness_residual(w0) <= 1e-8 * scale) {
        BalancedCondition bc;
        bc.kbar = std::min(prob.output_dim(), small.rank);
        const Eigen::VectorXd s = svd(w0.layer(0)).sigma;
        bc.sigma_kbar = bc.kbar <= s.size() ? s(bc.kbar - 1) : 0.0;
        bc.lhs = rep.loss0 - rep.loss_min;
        bc.rhs = std::pow(bc.sigma_kbar, 2.0 * prob.depth()) * small.value * small.value /
                 (std::pow(4.0, prob.depth() + 1) * prob.m());
        bc.holds = bc.lhs <= bc.rhs;
        rep.balanced = bc;
    }
    return rep;
}

}  // namespace lgnn

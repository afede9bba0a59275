#include "lgnn/grad.hpp"

#include <algorithm>
#include <cmath>

#include "lgnn/error.hpp"

namespace lgnn {

double GradientStack::norm_sq() const {
    double total = 0.0;
    for (const auto& g : layers) total += g.squaredNorm();
    return total;
}

double GradientStack::max_abs() const {
    double worst = 0.0;
    for (const auto& g : layers) {
        if (g.size()) worst = std::max(worst, g.cwiseAbs().maxCoeff());
    }
    return worst;
}

GradientStack gradients(const WeightStack& w, const Problem& prob) {
    prob.check_compatible(w);
    const std::size_t layers = w.num_layers();
    const int d_x = prob.input_dim();
    const int d_y = prob.output_dim();

    // prefix[l] = W_l ... W_1 (prefix[0] = I_{d_x}); suffix[l] = W_{H+1} ... W_{l+1} (suffix[L] = I_{d_y}).
    std::vector<Eigen::MatrixXd> prefix(layers + 1);
    prefix[0] = Eigen::MatrixXd::Identity(d_x, d_x);
    for (std::size_t l = 0; l < layers; ++l) prefix[l + 1] = w.layer(l) * prefix[l];
    std::vector<Eigen::MatrixXd> suffix(layers + 1);
    suffix[layers] = Eigen::MatrixXd::Identity(d_y, d_y);
    for (std::size_t l = layers; l-- > 0;) suffix[l] = suffix[l + 1] * w.layer(l);

    const Eigen::MatrixXd& m = prob.restricted();
    const Eigen::MatrixXd residual = prefix[layers] * m - prob.labels();
    const Eigen::MatrixXd core = (2.0 / prob.m()) * (residual * m.transpose());  // d_y x d_x

    GradientStack g;
    g.layers.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        // Layer l (zero-based) is W_{l+1}: left factor suffix[l+1], right factor prefix[l].
        g.layers.push_back(suffix[l + 1].transpose() * core * prefix[l].transpose());
    }
    return g;
}

GradientStack fd_gradient(const WeightStack& w, const Problem& prob, double h) {
    if (!(h > 0.0)) throw ParameterError("finite-difference step must be positive");
    prob.check_compatible(w);
    std::vector<Eigen::MatrixXd> layers = w.layers();
    GradientStack g;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd out(layers[l].rows(), layers[l].cols());
        for (Eigen::Index j = 0; j < layers[l].cols(); ++j) {
            for (Eigen::Index i = 0; i < layers[l].rows(); ++i) {
                const double saved = layers[l](i, j);
                layers[l](i, j) = saved + h;
                const double plus = loss(WeightStack(layers), prob);
                layers[l](i, j) = saved - h;
                const double minus = loss(WeightStack(layers), prob);
                layers[l](i, j) = saved;
                out(i, j) = (plus - minus) / (2.0 * h);
            }
        }
        g.layers.push_back(std::move(out));
    }
    return g;
}

double max_relative_error(const GradientStack& analytic, const GradientStack& numeric) {
    if (analytic.layers.size() != numeric.layers.size()) throw ShapeError("gradient stacks differ in depth");
    const double floor = std::max(1e-3 * analytic.max_abs(), 1e-8);
    double worst = 0.0;
    for (std::size_t l = 0; l < analytic.layers.size(); ++l) {
        const auto& a = analytic.layers[l];
        const auto& b = numeric.layers[l];
        if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("gradient layer shapes differ");
        for (Eigen::Index k = 0; k < a.size(); ++k) {
            const double x = a.data()[k];
            const double y = b.data()[k];
            const double denom = std::max({std::abs(x), std::abs(y), floor});
            worst = std::max(worst, std::abs(x - y) / denom);
        }
    }
    return worst;
}

double inner(const GradientStack& g, const std::vector<Eigen::MatrixXd>& d) {
    if (g.layers.size() != d.size()) throw ShapeError("inner product of stacks with different depth");
    double total = 0.0;
    for (std::size_t l = 0; l < d.size(); ++l) total += g.layers[l].cwiseProduct(d[l]).sum();
    return total;
}

}  // namespace lgnn

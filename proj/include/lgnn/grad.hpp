#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lgnn/gnn.hpp"

namespace lgnn {

/// Per-layer gradients, same shapes as the WeightStack they came from.
struct GradientStack {
    std::vector<Eigen::MatrixXd> layers;

    /// |grad L|^2, the sum of squared Frobenius norms over layers.
    double norm_sq() const;
    /// Largest absolute entry over all layers.
    double max_abs() const;
};

/// Analytic gradient:
///   dL/dW_l = (2/m) (W_{H+1}...W_{l+1})^T (Yhat - Y) M^T (W_{l-1}...W_1)^T
/// with M = (X S^H)_{*I}, built from prefix and suffix products.
GradientStack gradients(const WeightStack& w, const Problem& prob);

inline constexpr double kDefaultFdStep = 1e-6;

/// Central differences, one scalar parameter at a time.
GradientStack fd_gradient(const WeightStack& w, const Problem& prob, double h = kDefaultFdStep);

/// Largest entrywise |a - b| / max(|a|, |b|, floor) where
/// floor = max(1e-3 * max|a|, 1e-8). Entries far below the gradient's own
/// scale are compared against that scale, where finite differences carry
/// only roundoff.
double max_relative_error(const GradientStack& analytic, const GradientStack& numeric);

/// <G, D> summed over layers.
double inner(const GradientStack& g, const std::vector<Eigen::MatrixXd>& d);

}  // namespace lgnn

#pragma once

#include <optional>

#include <Eigen/Dense>

#include "lgnn/gnn.hpp"
#include "lgnn/weights.hpp"

namespace lgnn {

/// Rectangular "diagonal": entries [i,i] = value for i < min(rows, cols).
Eigen::MatrixXd rect_diagonal(int rows, int cols, double value);

/// W_1 = 0, W_2..W_H unit rectangular diagonals, W_{H+1} = a on the diagonal.
WeightStack theorem_init(const Dims& dims, double a);

/// (1/4^{H-1}) prod_{l=2}^{H+1} sigma_min^2(W_l).
double init_beta(const WeightStack& w);

/// Smallest a for which theorem_init(a) satisfies the convergence condition:
///   a^2 >= max{1, 4^{H+1} m (||Y||_F^2 - L~_H) / sigma_small^2((X S^H)_{*I})}.
/// Throws DomainError when (X S^H)_{*I} = 0.
double min_admissible_a(const Problem& prob);

/// Balanced factorization of `target` (d_y x d_x) across the widths in `dims`:
/// with target = U S V^T of rank r, W_1 = Q_1 S^{1/(H+1)} V^T,
/// W_l = Q_l S^{1/(H+1)} Q_{l-1}^T, W_{H+1} = U S^{1/(H+1)} Q_H^T, where Q_l
/// are the first r columns of the identity.
///
/// The target's rows must lie in the column space of (X S^H)_{*I}, so that
/// W_1 U_M vanishes on the trailing left singular directions of the restricted
/// features. Throws ParameterError when that fails, when d_y exceeds a hidden
/// width, or when shapes disagree.
WeightStack balanced_init(const Dims& dims, const Eigen::MatrixXd& target, const Problem& prob);

/// Extra check for balanced starts:
///   L(W(0)) - L~ <= sigma_kbar^{2H}(W_1(0)) sigma_small^2 / (4^{H+1} m),
/// with kbar = min(d_y, rank (X S^H)_{*I}).
struct BalancedCondition {
    int kbar = 0;
    double sigma_kbar = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

struct InitReport {
    double beta = 0.0;
    /// min over l = 2..H+1 of sigma_min(W_l(0)) / 2.
    double r = 0.0;
    double sigma_small = 0.0;
    double alpha_lower = 0.0;
    double loss0 = 0.0;
    double loss_min = 0.0;
    double condition_lhs = 0.0;
    double condition_rhs = 0.0;
    bool valid = false;
    /// Present when the start is balanced to 1e-8 relative.
    std::optional<BalancedCondition> balanced;
};

/// Evaluates 4 (L(W0) - L~) <= r^2 beta sigma_small^2 / m. Never throws on an
/// unsatisfied condition; it reports valid = false.
InitReport validate_init(const WeightStack& w0, const Problem& prob);

}  // namespace lgnn

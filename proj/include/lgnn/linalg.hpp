#pragma once

#include <Eigen/Dense>

#include "lgnn/weights.hpp"

namespace lgnn {

/// Relative threshold: sigma_i counts as zero when sigma_i <= tol * sigma_max.
inline constexpr double kDefaultRankTol = 1e-10;

struct SvdResult {
    Eigen::MatrixXd U;
    Eigen::VectorXd sigma;  // non-increasing, length min(rows, cols)
    Eigen::MatrixXd V;
    double rank_tol = kDefaultRankTol;

    /// Number of singular values above rank_tol * sigma_max.
    int rank() const;
};

/// Thin factors by default; `full` returns square U and V.
SvdResult svd(const Eigen::MatrixXd& m, bool full = false, double rel_tol = kDefaultRankTol);

/// Smallest singular value, zeros included. Zero for an empty dimension.
double sigma_min(const Eigen::MatrixXd& m);
double sigma_max(const Eigen::MatrixXd& m);

struct SigmaSmall {
    double value;
    int rank;
};

/// Smallest singular value above rel_tol * sigma_max. Throws DomainError for
/// the zero (or empty) matrix.
SigmaSmall sigma_small(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTol);

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTol);

/// M^+ M: orthogonal projector onto the row space of M.
Eigen::MatrixXd row_space_projector(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTol);

/// M M^+: orthogonal projector onto the column space of M.
Eigen::MatrixXd column_space_projector(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTol);

/// max over consecutive layers of ||W_l W_l^T - W_{l+1}^T W_{l+1}||_F.
double balancedness_residual(const WeightStack& w);

}  // namespace lgnn

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lgnn/shift.hpp"
#include "lgnn/weights.hpp"

namespace lgnn {

/// X S^H by repeated right multiplication.
Eigen::MatrixXd propagate(const Eigen::MatrixXd& x, const Eigen::MatrixXd& s, int depth);

/// Columns of `m` at `indices`, in the order given.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<int>& indices);

/// Semi-supervised node regression instance: features X (d_x x n), shift S,
/// depth H, labels Y (d_y x n_bar) paired positionally with `labeled`.
///
/// The restricted propagated features (X S^H)_{*I} are formed once at
/// construction; every loss and gradient evaluation reuses them.
class Problem {
public:
    Problem(Eigen::MatrixXd features, ShiftMatrix shift, int depth, Eigen::MatrixXd labels, std::vector<int> labeled);

    const Eigen::MatrixXd& features() const { return x_; }
    const ShiftMatrix& shift() const { return s_; }
    int depth() const { return depth_; }
    const Eigen::MatrixXd& labels() const { return y_; }
    const std::vector<int>& labeled() const { return labeled_; }

    int num_nodes() const { return static_cast<int>(x_.cols()); }
    int input_dim() const { return static_cast<int>(x_.rows()); }
    int output_dim() const { return static_cast<int>(y_.rows()); }
    int num_labeled() const { return static_cast<int>(labeled_.size()); }
    /// m = n_bar * d_y.
    double m() const { return static_cast<double>(labeled_.size()) * static_cast<double>(y_.rows()); }

    /// X S^H.
    const Eigen::MatrixXd& propagated() const { return propagated_; }
    /// (X S^H)_{*I}.
    const Eigen::MatrixXd& restricted() const { return restricted_; }
    /// Y M^+ M: labels projected onto the row space of the restricted features.
    const Eigen::MatrixXd& projected_labels() const { return projected_labels_; }

    /// Same graph data with a different labeled set and labels.
    Problem with_labels(Eigen::MatrixXd labels, std::vector<int> labeled) const;

    /// Throws ShapeError unless the stack maps d_x to d_y and has depth H.
    void check_compatible(const WeightStack& w) const;

private:
    Eigen::MatrixXd x_;
    ShiftMatrix s_;
    int depth_;
    Eigen::MatrixXd y_;
    std::vector<int> labeled_;
    Eigen::MatrixXd propagated_;
    Eigen::MatrixXd restricted_;
    Eigen::MatrixXd projected_labels_;
};

/// Literal layer-by-layer evaluation: X_l = W_l X_{l-1} S, output W_{H+1} X_H.
Eigen::MatrixXd forward(const WeightStack& w, const Problem& prob);

/// W_{H+1} W_H ... W_1.
Eigen::MatrixXd collapsed_product(const WeightStack& w);

/// Predictions on the labeled nodes, W_[1:H+1] (X S^H)_{*I}.
Eigen::MatrixXd predict_labeled(const WeightStack& w, const Problem& prob);

/// (1/m) || f(X, W)_{*I} - Y ||_F^2.
double loss(const WeightStack& w, const Problem& prob);

/// Loss of a single d_y x d_x matrix acting on the restricted features.
double collapsed_loss(const Eigen::MatrixXd& product, const Problem& prob);

/// L(W) - L~ evaluated as (1/m) ||W_[1:H+1] M - Y M^+ M||_F^2. Predictions
/// always lie in the row space of M, so this equals loss() minus the
/// least-squares minimum without the cancellation of subtracting the two.
double excess_loss(const WeightStack& w, const Problem& prob);

struct GlobalMinimum {
    double value;
    /// False when some hidden width is below min(d_x, d_y): `value` is then
    /// only a lower bound on the loss reachable by the factorized network.
    bool exact;
};

/// (1/m) || Y (I - M^+ M) ||_F^2 with M = (X S^H)_{*I}. When `dims` is given,
/// exactness is judged against its hidden widths.
GlobalMinimum global_min_loss(const Problem& prob, const std::optional<Dims>& dims = std::nullopt);

/// Y M^+, the least-squares minimizer of smallest Frobenius norm.
Eigen::MatrixXd min_norm_solution(const Problem& prob);

}  // namespace lgnn

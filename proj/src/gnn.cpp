#include "lgnn/gnn.hpp"

#include <algorithm>

#include "lgnn/error.hpp"
#include "lgnn/linalg.hpp"

namespace lgnn {

Eigen::MatrixXd propagate(const Eigen::MatrixXd& x, const Eigen::MatrixXd& s, int depth) {
    if (x.cols() != s.rows()) throw ShapeError("feature columns do not match shift size");
    Eigen::MatrixXd out = x;
    for (int h = 0; h < depth; ++h) out = out * s;
    return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<int>& indices) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(indices[j]);
    return out;
}

Problem::Problem(Eigen::MatrixXd features, ShiftMatrix shift, int depth, Eigen::MatrixXd labels, std::vector<int> labeled)
    : x_(std::move(features)), s_(std::move(shift)), depth_(depth), y_(std::move(labels)), labeled_(std::move(labeled)) {
    if (depth_ < 1) throw ParameterError("depth H must be at least 1");
    if (x_.rows() == 0 || x_.cols() == 0) throw ShapeError("feature matrix is empty");
    if (s_.matrix.rows() != s_.matrix.cols() || s_.matrix.rows() != x_.cols()) {
        throw ShapeError("shift must be n x n with n = feature columns (" + std::to_string(x_.cols()) + ")");
    }
    if (labeled_.empty()) throw ParameterError("labeled set is empty");
    if (y_.rows() == 0) throw ShapeError("label matrix has no rows");
    if (y_.cols() != static_cast<Eigen::Index>(labeled_.size())) {
        throw ShapeError("label columns (" + std::to_string(y_.cols()) + ") must equal labeled set size (" +
                         std::to_string(labeled_.size()) + ")");
    }
    std::vector<int> sorted = labeled_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ParameterError("labeled indices repeat");
    if (sorted.front() < 0 || sorted.back() >= x_.cols()) throw ParameterError("labeled index out of range");
    propagated_ = propagate(x_, s_.matrix, depth_);
    restricted_ = select_columns(propagated_, labeled_);
    projected_labels_ = y_ * row_space_projector(restricted_);
}

Problem Problem::with_labels(Eigen::MatrixXd labels, std::vector<int> labeled) const {
    return Problem(x_, s_, depth_, std::move(labels), std::move(labeled));
}

void Problem::check_compatible(const WeightStack& w) const {
    if (w.depth() != depth_) {
        throw ShapeError("stack depth " + std::to_string(w.depth()) + " differs from problem depth " + std::to_string(depth_));
    }
    if (w.input_dim() != input_dim() || w.output_dim() != output_dim()) {
        throw ShapeError("stack maps " + std::to_string(w.input_dim()) + " -> " + std::to_string(w.output_dim()) +
                         " but problem needs " + std::to_string(input_dim()) + " -> " + std::to_string(output_dim()));
    }
}

Eigen::MatrixXd forward(const WeightStack& w, const Problem& prob) {
    prob.check_compatible(w);
    Eigen::MatrixXd h = prob.features();
    for (int l = 0; l < prob.depth(); ++l) h = (w.layer(l) * h) * prob.shift().matrix;
    return w.layer(w.num_layers() - 1) * h;
}

Eigen::MatrixXd collapsed_product(const WeightStack& w) {
    Eigen::MatrixXd p = w.layer(0);
    for (std::size_t l = 1; l < w.num_layers(); ++l) p = w.layer(l) * p;
    return p;
}

Eigen::MatrixXd predict_labeled(const WeightStack& w, const Problem& prob) {
    prob.check_compatible(w);
    return collapsed_product(w) * prob.restricted();
}

double collapsed_loss(const Eigen::MatrixXd& product, const Problem& prob) {
    if (product.rows() != prob.output_dim() || product.cols() != prob.input_dim()) {
        throw ShapeError("collapsed matrix must be d_y x d_x");
    }
    return (product * prob.restricted() - prob.labels()).squaredNorm() / prob.m();
}

double loss(const WeightStack& w, const Problem& prob) {
    prob.check_compatible(w);
    return collapsed_loss(collapsed_product(w), prob);
}

double excess_loss(const WeightStack& w, const Problem& prob) {
    prob.check_compatible(w);
    return (collapsed_product(w) * prob.restricted() - prob.projected_labels()).squaredNorm() / prob.m();
}

GlobalMinimum global_min_loss(const Problem& prob, const std::optional<Dims>& dims) {
    const Eigen::MatrixXd& m = prob.restricted();
    const Eigen::MatrixXd& y = prob.labels();
    const Eigen::MatrixXd residual = y - y * row_space_projector(m);
    bool exact = true;
    if (dims) {
        const int need = std::min(prob.input_dim(), prob.output_dim());
        for (std::size_t l = 1; l + 1 < dims->size(); ++l) exact = exact && (*dims)[l] >= need;
    }
    return GlobalMinimum{residual.squaredNorm() / prob.m(), exact};
}

Eigen::MatrixXd min_norm_solution(const Problem& prob) { return prob.labels() * pseudoinverse(prob.restricted()); }

}  // namespace lgnn

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lgnn {

/// Dimension schedule (d_x, d_1, ..., d_H, d_y); size is H + 2.
using Dims = std::vector<int>;

/// Checks H >= 1, positive entries and d_1 >= d_2 >= ... >= d_y.
/// Throws ShapeError.
void validate_dims(const Dims& dims);
std::string format_dims(const Dims& dims);

/// Ordered weights W_1, ..., W_{H+1}; W_l has shape d_l x d_{l-1}.
class WeightStack {
public:
    /// Validates the chain and the non-increasing hidden widths.
    explicit WeightStack(std::vector<Eigen::MatrixXd> layers);

    static WeightStack zeros(const Dims& dims);

    int depth() const { return static_cast<int>(layers_.size()) - 1; }
    std::size_t num_layers() const { return layers_.size(); }
    Dims dims() const;
    int input_dim() const { return static_cast<int>(layers_.front().cols()); }
    int output_dim() const { return static_cast<int>(layers_.back().rows()); }

    /// Zero-based: layer(0) is W_1.
    const Eigen::MatrixXd& layer(std::size_t i) const { return layers_[i]; }
    const std::vector<Eigen::MatrixXd>& layers() const { return layers_; }

    std::size_t num_parameters() const;
    double squared_norm() const;

    /// this - step * direction, layer by layer. Shapes must match.
    WeightStack axpy(double step, const std::vector<Eigen::MatrixXd>& direction) const;
    /// Sum over layers of squared Frobenius distance.
    double squared_distance(const WeightStack& other) const;

private:
    std::vector<Eigen::MatrixXd> layers_;
};

}  // namespace lgnn

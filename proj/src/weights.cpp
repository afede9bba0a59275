#include "lgnn/weights.hpp"

#include "lgnn/error.hpp"

namespace lgnn {

void validate_dims(const Dims& dims) {
    if (dims.size() < 3) throw ShapeError("dims need at least (d_x, d_1, d_y), i.e. H >= 1");
    for (int d : dims) {
        if (d < 1) throw ShapeError("dims must be positive: " + format_dims(dims));
    }
    for (std::size_t i = 2; i < dims.size(); ++i) {
        if (dims[i] > dims[i - 1]) {
            throw ShapeError("hidden and output widths must be non-increasing: " + format_dims(dims));
        }
    }
}

std::string format_dims(const Dims& dims) {
    std::string out = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(dims[i]);
    }
    return out + ")";
}

WeightStack::WeightStack(std::vector<Eigen::MatrixXd> layers) : layers_(std::move(layers)) {
    if (layers_.size() < 2) throw ShapeError("weight stack needs at least two layers (H >= 1)");
    for (std::size_t i = 1; i < layers_.size(); ++i) {
        if (layers_[i].cols() != layers_[i - 1].rows()) {
            throw ShapeError("layer " + std::to_string(i + 1) + " has " + std::to_string(layers_[i].cols()) +
                             " columns but layer " + std::to_string(i) + " has " + std::to_string(layers_[i - 1].rows()) +
                             " rows");
        }
    }
    validate_dims(dims());
}

WeightStack WeightStack::zeros(const Dims& dims) {
    validate_dims(dims);
    std::vector<Eigen::MatrixXd> layers;
    for (std::size_t i = 1; i < dims.size(); ++i) layers.push_back(Eigen::MatrixXd::Zero(dims[i], dims[i - 1]));
    return WeightStack(std::move(layers));
}

Dims WeightStack::dims() const {
    Dims d{static_cast<int>(layers_.front().cols())};
    for (const auto& w : layers_) d.push_back(static_cast<int>(w.rows()));
    return d;
}

std::size_t WeightStack::num_parameters() const {
    std::size_t total = 0;
    for (const auto& w : layers_) total += static_cast<std::size_t>(w.size());
    return total;
}

double WeightStack::squared_norm() const {
    double total = 0.0;
    for (const auto& w : layers_) total += w.squaredNorm();
    return total;
}

WeightStack WeightStack::axpy(double step, const std::vector<Eigen::MatrixXd>& direction) const {
    if (direction.size() != layers_.size()) throw ShapeError("direction has wrong number of layers");
    std::vector<Eigen::MatrixXd> out;
    out.reserve(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (direction[i].rows() != layers_[i].rows() || direction[i].cols() != layers_[i].cols()) {
            throw ShapeError("direction layer " + std::to_string(i + 1) + " has wrong shape");
        }
        out.push_back(layers_[i] - step * direction[i]);
    }
    return WeightStack(std::move(out));
}

double WeightStack::squared_distance(const WeightStack& other) const {
    if (other.layers_.size() != layers_.size()) throw ShapeError("stacks differ in depth");
    double total = 0.0;
    for (std::size_t i = 0; i < layers_.size(); ++i) total += (layers_[i] - other.layers_[i]).squaredNorm();
    return total;
}

}  // namespace lgnn

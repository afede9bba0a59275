#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "lgnn/rng.hpp"

namespace lgnn::test {

inline Eigen::MatrixXd randn(int rows, int cols, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    }
    return m;
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace lgnn::test

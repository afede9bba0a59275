#include "lgnn/linalg.hpp"

#include <algorithm>

#include "lgnn/error.hpp"

namespace lgnn {

int SvdResult::rank() const {
    if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
    const double cutoff = rank_tol * sigma(0);
    int r = 0;
    while (r < sigma.size() && sigma(r) > cutoff) ++r;
    return r;
}

SvdResult svd(const Eigen::MatrixXd& m, bool full, double rel_tol) {
    const unsigned opts = full ? (Eigen::ComputeFullU | Eigen::ComputeFullV) : (Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::JacobiSVD<Eigen::MatrixXd> dec(m, opts);
    return SvdResult{dec.matrixU(), dec.singularValues(), dec.matrixV(), rel_tol};
}

double sigma_min(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
    return s(s.size() - 1);
}

double sigma_max(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

SigmaSmall sigma_small(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.size() == 0) throw DomainError("sigma_small of an empty matrix");
    const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
    if (s(0) == 0.0) throw DomainError("sigma_small of the zero matrix is undefined");
    const double cutoff = std::min(rel_tol, 0.5) * s(0);
    int r = 1;
    while (r < s.size() && s(r) > cutoff) ++r;
    return SigmaSmall{s(r - 1), r};
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& m, double rel_tol) {
    const SvdResult dec = svd(m, false, rel_tol);
    const int r = dec.rank();
    if (r == 0) return Eigen::MatrixXd::Zero(m.cols(), m.rows());
    const Eigen::VectorXd inv = dec.sigma.head(r).cwiseInverse();
    return dec.V.leftCols(r) * inv.asDiagonal() * dec.U.leftCols(r).transpose();
}

Eigen::MatrixXd row_space_projector(const Eigen::MatrixXd& m, double rel_tol) {
    const SvdResult dec = svd(m, false, rel_tol);
    const auto v = dec.V.leftCols(dec.rank());
    return v * v.transpose();
}

Eigen::MatrixXd column_space_projector(const Eigen::MatrixXd& m, double rel_tol) {
    const SvdResult dec = svd(m, false, rel_tol);
    const auto u = dec.U.leftCols(dec.rank());
    return u * u.transpose();
}

double balancedness_residual(const WeightStack& w) {
    double worst = 0.0;
    for (std::size_t l = 0; l + 1 < w.num_layers(); ++l) {
        const auto& lower = w.layer(l);
        const auto& upper = w.layer(l + 1);
        const double r = (lower * lower.transpose() - upper.transpose() * upper).norm();
        worst = std::max(worst, r);
    }
    return worst;
}

}  // namespace lgnn

#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lgnn/gnn.hpp"
#include "lgnn/shift.hpp"
#include "lgnn/weights.hpp"

namespace lgnn {

/// Rate constants of an initialization on a problem.
struct RateBundle {
    double sigma_small_restricted = 0.0;
    double beta = 0.0;
    double m = 0.0;
    /// beta sigma_small^2 / m; also the exponent per unit time of the flow bound.
    double alpha_lower = 0.0;

    double flow_rate() const { return alpha_lower; }
    /// 1 - eta alpha_lower / 2, the per-iteration contraction of descent.
    double descent_factor(double eta) const { return 1.0 - eta * alpha_lower / 2.0; }
};

RateBundle rate_bundle(const WeightStack& w0, const Problem& prob);

/// (t, exp(-alpha_lower t) (L0 - L~)) for each t. Throws ParameterError if L0 < L~.
std::vector<std::pair<double, double>> flow_bound_curve(const RateBundle& bundle, double loss0, double loss_min,
                                                        const std::vector<double>& ts);

/// (H+1) sum_{i <= min(d_x, d_y)} sigma_i^{2/(H+1)}(Y M^+).
double energy_min_value(const Problem& prob, int depth);
inline double energy_min_value(const Problem& prob) { return energy_min_value(prob, prob.depth()); }

/// Energy of a target product under the balanced factorization of given depth.
double balanced_energy(const Eigen::MatrixXd& product, int depth);

struct SigmaPrediction {
    double value = 0.0;
    /// n_bar >= d_x: the regime where the linear (n_bar / n) scaling is claimed.
    bool in_regime = false;
};

/// (n_bar / n) sigma_small(X S^H) from the unrestricted propagated features.
SigmaPrediction expected_sigma_small(const Eigen::MatrixXd& propagated, int n_bar);
SigmaPrediction expected_sigma_small(const Eigen::MatrixXd& features, const ShiftMatrix& shift, int depth, int n_bar);

/// lambda_{d_x}(S)^{H-1} sigma_small(X S), lambda ranked by magnitude.
/// Diagnostic only. Throws ParameterError if d_x > n.
double depth_scaling_estimate(const Eigen::MatrixXd& features, const ShiftMatrix& shift, int depth);

/// Eigenvalue magnitudes of S in non-increasing order.
Eigen::VectorXd eigenvalue_magnitudes(const ShiftMatrix& shift);

}  // namespace lgnn

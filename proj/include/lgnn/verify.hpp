#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lgnn/gnn.hpp"
#include "lgnn/shift.hpp"
#include "lgnn/weights.hpp"

namespace lgnn {

struct CheckResult {
    std::string name;
    bool passed = false;
    /// One-line summary of what was measured.
    std::string detail;
};

/// Erdos-Renyi graph with edge probability p_edge, Gaussian features and
/// Gaussian labels, labeled set drawn uniformly. Everything follows from `seed`.
Problem random_problem(std::uint64_t seed, int n, int d_x, int d_y, int depth, ShiftKind kind, int n_bar,
                       double p_edge = 0.3);

/// Entries N(0, scale^2).
WeightStack random_stack(const Dims& dims, std::uint64_t seed, double scale = 1.0);

/// Least squares via the eigendecomposition of M M^T, independent of the SVD
/// path: W = Y M^T (M M^T)^+, L = (1/m) ||W M - Y||^2.
struct NormalEquationsOracle {
    Eigen::MatrixXd solution;
    double loss = 0.0;
    /// Orthogonal projector onto col(M), from the same eigendecomposition.
    Eigen::MatrixXd column_projector;
};
NormalEquationsOracle normal_equations_oracle(const Problem& prob);

/// Analytic gradients against central differences on `instances` random
/// problems (H in {1,2,3}, dims <= 8, n <= 15, every shift kind).
CheckResult check_gradients(int instances, std::uint64_t seed, double tol = 1e-5);

/// Gradient flow from theorem_init(min_admissible_a): valid init, envelope
/// rel_loss(t) <= exp(-alpha t)(1 + 1e-6), safety ball, monotone loss.
CheckResult check_flow_envelope(int problems, std::uint64_t seed, int n_max = 200);

/// Automatic-step descent on the same problems: rho_k <= 1 - eta alpha / 2 + 1e-9
/// and the observed iterations to eps = 1e-6 (L0 - L~) within iterations_to_epsilon.
CheckResult check_descent_contraction(int problems, std::uint64_t seed, int n_max = 200);

/// global_min_loss and min_norm_solution against normal_equations_oracle to
/// `tol` absolute, and min-norm against `perturbations` other minimizers each.
/// Draws whose restricted features have sigma_max / sigma_small > 1e2 are
/// replaced by fresh draws.
CheckResult check_global_min(int instances, int perturbations, std::uint64_t seed, double tol = 1e-10);

/// Flow from balanced_init(0.5 Y M^+): balance residual <= 1e-6 max_l ||W_l||^2
/// at every sample, final energy within 1e-3 of energy_min_value and product
/// within 1e-6 of Y M^+ (both relative).
CheckResult check_energy_optimum(int instances, std::uint64_t seed);

/// Penrose conditions of the pseudoinverse, idempotent symmetric projectors,
/// sigma_small against the smallest nonzero eigenvalue of M M^T.
CheckResult check_linalg(int instances, std::uint64_t seed);

/// energy_min_value below the energy of random unbalanced factorizations of
/// Y M^+, equal to the balanced one; sigma_small invariant under permuting I.
CheckResult check_theory(int instances, std::uint64_t seed);

/// G(200, p) for p in {0.03, 0.1, 0.3}, Laplacian shift, d_x = 50, H = 2,
/// hidden widths 32, a = 2, n_bar = 150, master seed `seed`: time to
/// rel_loss 1e-3 strictly decreases as sigma_small increases.
CheckResult check_sparsity_ordering(std::uint64_t seed = 0);

/// G(200, 0.1), d_x = 30, H = 2, adjacency, `replications` labeled sets per
/// n_bar. First result: mean within 10% of (n_bar / n) sigma_small(X S^H) for
/// n_bar in {40, 60, ..., 180}. Second: mean non-increasing on {5, ..., 30} and
/// non-decreasing on {30, ..., 180}, allowing one violating grid point each.
std::vector<CheckResult> check_sigma_scaling(int replications, std::uint64_t seed = 0);

/// The suite behind `lgnn verify`: every check above except the sigma scaling
/// law, at reduced instance counts.
std::vector<CheckResult> run_verify_suite(std::uint64_t seed = 0);

}  // namespace lgnn

#include "lgnn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "lgnn/dynamics.hpp"
#include "lgnn/experiments.hpp"
#include "lgnn/grad.hpp"
#include "lgnn/init.hpp"
#include "lgnn/linalg.hpp"
#include "lgnn/rng.hpp"
#include "lgnn/theory.hpp"

namespace lgnn {

namespace {

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

int uniform_int(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); }

Eigen::MatrixXd normal_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    }
    return m;
}

// Problems for the dynamics checks: theorem_init needs hidden widths of at
// least d_y, so every hidden layer gets width 10.
struct DynamicsCase {
    Problem problem;
    Dims dims;
};

DynamicsCase dynamics_case(std::uint64_t seed, int index, int n_max) {
    Rng rng(seed + static_cast<std::uint64_t>(index) * 7919);
    const int n = uniform_int(rng, 20, std::max(20, n_max));
    const int d_x = uniform_int(rng, 3, 10);
    const int d_y = uniform_int(rng, 1, 2);
    const int depth = 1 + index % 3;
    const ShiftKind kind = kAllShiftKinds[static_cast<std::size_t>(index) % kAllShiftKinds.size()];
    Problem prob = random_problem(rng.next_u64(), n, d_x, d_y, depth, kind, (3 * n) / 4, 0.2);
    Dims dims{d_x};
    for (int l = 0; l < depth; ++l) dims.push_back(10);
    dims.push_back(d_y);
    return {std::move(prob), std::move(dims)};
}

CheckResult make(std::string name, int failures, int total, std::string detail) {
    return CheckResult{std::move(name), failures == 0,
                       fmt("%d/%d ok; ", total - failures, total) + detail};
}

}  // namespace

Problem random_problem(std::uint64_t seed, int n, int d_x, int d_y, int depth, ShiftKind kind, int n_bar,
                       double p_edge) {
    Rng rng(seed);
    Graph g = erdos_renyi(n, p_edge, rng.next_u64());
    Eigen::MatrixXd x = normal_matrix(rng, d_x, n);
    std::vector<int> labeled = sample_labeled_set(n, n_bar, rng.next_u64());
    Eigen::MatrixXd y = normal_matrix(rng, d_y, n_bar);
    return Problem(std::move(x), build_shift(g, kind), depth, std::move(y), std::move(labeled));
}

WeightStack random_stack(const Dims& dims, std::uint64_t seed, double scale) {
    Rng rng(seed);
    std::vector<Eigen::MatrixXd> layers;
    for (std::size_t l = 1; l < dims.size(); ++l) layers.push_back(normal_matrix(rng, dims[l], dims[l - 1], scale));
    return WeightStack(std::move(layers));
}

NormalEquationsOracle normal_equations_oracle(const Problem& prob) {
    const Eigen::MatrixXd& m = prob.restricted();
    const Eigen::MatrixXd gram = m * m.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(lambda.maxCoeff(), 0.0);
    Eigen::MatrixXd gram_pinv = Eigen::MatrixXd::Zero(gram.rows(), gram.cols());
    Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(gram.rows(), gram.cols());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > cutoff && lambda(i) > 0.0) {
            const Eigen::VectorXd v = eig.eigenvectors().col(i);
            gram_pinv += v * v.transpose() / lambda(i);
            proj += v * v.transpose();
        }
    }
    NormalEquationsOracle out;
    out.solution = prob.labels() * m.transpose() * gram_pinv;
    out.loss = (out.solution * m - prob.labels()).squaredNorm() / prob.m();
    out.column_projector = proj;
    return out;
}

CheckResult check_gradients(int instances, std::uint64_t seed, double tol) {
    Rng rng(seed);
    int failures = 0;
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        const int depth = 1 + i % 3;
        const ShiftKind kind = kAllShiftKinds[static_cast<std::size_t>(i) % kAllShiftKinds.size()];
        const int n = uniform_int(rng, 2, 15);
        Dims dims{uniform_int(rng, 1, 8)};
        dims.push_back(uniform_int(rng, 1, 8));
        for (int l = 2; l <= depth + 1; ++l) dims.push_back(uniform_int(rng, 1, dims.back()));
        const Problem prob =
            random_problem(rng.next_u64(), n, dims.front(), dims.back(), depth, kind, uniform_int(rng, 1, n));
        const WeightStack w = random_stack(dims, rng.next_u64(), 0.7);
        const double err = max_relative_error(gradients(w, prob), fd_gradient(w, prob));
        worst = std::max(worst, err);
        if (!(err <= tol)) ++failures;
    }
    return make("gradient_vs_fd", failures, instances, fmt("max relative error %.3g (tol %.0e)", worst, tol));
}

CheckResult check_flow_envelope(int problems, std::uint64_t seed, int n_max) {
    int failures = 0;
    int invalid = 0;
    double worst_ratio = 0.0;
    double worst_drift = 0.0;
    DynamicsOptions opts;
    opts.tol = 1e-8;
    for (int i = 0; i < problems; ++i) {
        const DynamicsCase c = dynamics_case(seed, i, n_max);
        const WeightStack w0 = theorem_init(c.dims, min_admissible_a(c.problem));
        const InitReport report = validate_init(w0, c.problem);
        const Trajectory traj = flow_integrate(w0, c.problem, 1e12, opts);
        double ratio = 0.0;
        for (const auto& s : traj.samples) ratio = std::max(ratio, s.rel_loss / std::exp(-report.alpha_lower * s.t));
        double drift = 0.0;
        for (const auto& s : traj.samples) drift = std::max(drift, s.drift_sq / (report.r * report.r));
        worst_ratio = std::max(worst_ratio, ratio);
        worst_drift = std::max(worst_drift, drift);
        if (!report.valid) ++invalid;
        const bool ok = report.valid && traj.status == RunStatus::Converged && traj.monotone &&
                        flow_bound_holds(traj, report.alpha_lower, 1e-6) && safety_ball_holds(traj, report.r);
        if (!ok) ++failures;
    }
    return make("flow_envelope", failures, problems,
                fmt("max rel_loss/exp(-alpha t) %.6f, max drift/r^2 %.3g, invalid inits %d", worst_ratio, worst_drift,
                    invalid));
}

CheckResult check_descent_contraction(int problems, std::uint64_t seed, int n_max) {
    int failures = 0;
    double worst_margin = -std::numeric_limits<double>::infinity();
    double worst_iter_ratio = 0.0;
    DynamicsOptions opts;
    opts.tol = 1e-7;
    for (int i = 0; i < problems; ++i) {
        const DynamicsCase c = dynamics_case(seed, i, n_max);
        const WeightStack w0 = theorem_init(c.dims, min_admissible_a(c.problem));
        const InitReport report = validate_init(w0, c.problem);
        const Trajectory traj = gradient_descent(w0, c.problem, std::nullopt, 10'000'000, opts);
        const double limit = 1.0 - traj.eta * report.alpha_lower / 2.0;
        for (double rho : traj.contraction) worst_margin = std::max(worst_margin, rho - limit);

        const double gap = traj.loss0 - traj.loss_min;
        const double eps = 1e-6 * gap;
        const std::size_t predicted = iterations_to_epsilon(report, traj.eta, traj.loss0, traj.loss_min, eps);
        // Excess after k steps is the running product of the contraction factors.
        std::size_t observed = std::numeric_limits<std::size_t>::max();
        double excess = excess_loss(w0, c.problem);
        if (excess <= eps) observed = 0;
        for (std::size_t k = 0; k < traj.contraction.size() && observed == std::numeric_limits<std::size_t>::max(); ++k) {
            excess *= traj.contraction[k];
            if (excess <= eps) observed = k + 1;
        }
        const bool reached = observed != std::numeric_limits<std::size_t>::max();
        if (reached && predicted > 0) {
            worst_iter_ratio = std::max(worst_iter_ratio, static_cast<double>(observed) / static_cast<double>(predicted));
        }
        const bool ok = report.valid && traj.monotone && reached && observed <= predicted &&
                        descent_bound_holds(traj, report.alpha_lower, 1e-9);
        if (!ok) ++failures;
    }
    return make("descent_contraction", failures, problems,
                fmt("max rho_k - (1 - eta alpha/2) %.3g, max observed/predicted iterations %.3g", worst_margin,
                    worst_iter_ratio));
}

CheckResult check_global_min(int instances, int perturbations, std::uint64_t seed, double tol) {
    Rng rng(seed);
    int failures = 0;
    double worst_loss = 0.0;
    double worst_solution = 0.0;
    double worst_norm_gap = std::numeric_limits<double>::infinity();
    int nontrivial = 0;
    int redrawn = 0;
    for (int i = 0; i < instances; ++i) {
        const int depth = 1 + i % 3;
        const ShiftKind kind = kAllShiftKinds[static_cast<std::size_t>(i) % kAllShiftKinds.size()];
        const int n = uniform_int(rng, 4, 15);
        const int d_x = uniform_int(rng, 1, 8);
        const int d_y = uniform_int(rng, 1, 3);
        Problem prob = random_problem(rng.next_u64(), n, d_x, d_y, depth, kind, uniform_int(rng, 1, n));
        // The oracle squares the condition number; keep draws where both
        // routes can resolve tol.
        while (sigma_max(prob.restricted()) > 0.0 &&
               sigma_max(prob.restricted()) > 1e2 * sigma_small(prob.restricted()).value) {
            prob = random_problem(rng.next_u64(), n, d_x, d_y, depth, kind, uniform_int(rng, 1, n));
            ++redrawn;
        }
        const NormalEquationsOracle oracle = normal_equations_oracle(prob);
        const Eigen::MatrixXd w = min_norm_solution(prob);
        const double loss_err = std::abs(global_min_loss(prob).value - oracle.loss);
        const double sol_err = (w - oracle.solution).cwiseAbs().maxCoeff();
        worst_loss = std::max(worst_loss, loss_err);
        worst_solution = std::max(worst_solution, sol_err);
        bool ok = loss_err <= tol && sol_err <= tol;

        // Other minimizers differ from W by rows orthogonal to col(M).
        const Eigen::MatrixXd complement = Eigen::MatrixXd::Identity(d_x, d_x) - oracle.column_projector;
        if (complement.norm() > 0.5) ++nontrivial;
        for (int j = 0; j < perturbations; ++j) {
            const Eigen::MatrixXd z = normal_matrix(rng, d_y, d_x) * complement;
            const Eigen::MatrixXd other = w + z;
            const double other_loss = collapsed_loss(other, prob);
            const double norm_gap = other.squaredNorm() - w.squaredNorm();
            worst_norm_gap = std::min(worst_norm_gap, norm_gap);
            if (std::abs(other_loss - oracle.loss) > tol || norm_gap < -tol) ok = false;
        }
        if (!ok) ++failures;
    }
    return make("global_min_oracle", failures, instances,
                fmt("max |L~ - oracle| %.3g, max |W~ - oracle| %.3g, min norm gap %.3g, rank-deficient %d, redrawn (cond > 1e2) %d",
                    worst_loss, worst_solution, worst_norm_gap, nontrivial, redrawn));
}

CheckResult check_energy_optimum(int instances, std::uint64_t seed) {
    Rng rng(seed);
    int failures = 0;
    double worst_balance = 0.0;
    double worst_energy = 0.0;
    double worst_product = 0.0;
    DynamicsOptions opts;
    opts.tol = 1e-14;
    for (int i = 0; i < instances; ++i) {
        const int depth = 1 + i % 3;
        const ShiftKind kind = kAllShiftKinds[static_cast<std::size_t>(i) % kAllShiftKinds.size()];
        const int n = uniform_int(rng, 8, 15);
        const int d_x = uniform_int(rng, 2, 5);
        const int d_y = uniform_int(rng, 1, 2);
        const Problem prob = random_problem(rng.next_u64(), n, d_x, d_y, depth, kind, uniform_int(rng, d_x, n));
        Dims dims{d_x};
        for (int l = 0; l < depth; ++l) dims.push_back(5);
        dims.push_back(d_y);
        const Eigen::MatrixXd target = min_norm_solution(prob);
        const WeightStack w0 = balanced_init(dims, 0.5 * target, prob);
        const Trajectory traj = flow_integrate(w0, prob, 1e9, opts);

        double scale = 0.0;
        for (const auto& l : w0.layers()) scale = std::max(scale, l.squaredNorm());
        for (const auto& l : traj.final_weights.layers()) scale = std::max(scale, l.squaredNorm());
        double balance = 0.0;
        for (const auto& s : traj.samples) balance = std::max(balance, s.balance_residual / scale);
        const double emin = energy_min_value(prob);
        const double energy = std::abs(traj.final_weights.squared_norm() - emin) / emin;
        const double product = (collapsed_product(traj.final_weights) - target).norm() / target.norm();
        worst_balance = std::max(worst_balance, balance);
        worst_energy = std::max(worst_energy, energy);
        worst_product = std::max(worst_product, product);
        if (!(traj.status == RunStatus::Converged && balance <= 1e-6 && energy <= 1e-3 && product <= 1e-6)) ++failures;
    }
    return make("energy_optimum", failures, instances,
                fmt("max balance/scale %.3g, max energy rel err %.3g, max product rel err %.3g", worst_balance,
                    worst_energy, worst_product));
}

CheckResult check_linalg(int instances, std::uint64_t seed) {
    Rng rng(seed);
    int failures = 0;
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        const int rows = uniform_int(rng, 1, 8);
        const int cols = uniform_int(rng, 1, 8);
        const int rank = uniform_int(rng, 1, std::min(rows, cols));
        const Eigen::MatrixXd m = normal_matrix(rng, rows, rank) * normal_matrix(rng, rank, cols);
        const Eigen::MatrixXd p = pseudoinverse(m);
        const double scale = std::max(1.0, m.norm() * p.norm());
        double err = 0.0;
        err = std::max(err, (m * p * m - m).norm() / std::max(1.0, m.norm()));
        err = std::max(err, (p * m * p - p).norm() / std::max(1.0, p.norm()));
        err = std::max(err, ((m * p).transpose() - m * p).norm() / scale);
        err = std::max(err, ((p * m).transpose() - p * m).norm() / scale);
        const Eigen::MatrixXd rp = row_space_projector(m);
        const Eigen::MatrixXd cp = column_space_projector(m);
        err = std::max(err, (rp * rp - rp).norm());
        err = std::max(err, (cp * cp - cp).norm());
        err = std::max(err, std::abs(rp.trace() - rank));

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m * m.transpose());
        const Eigen::VectorXd lambda = eig.eigenvalues().reverse();
        const SigmaSmall s = sigma_small(m);
        err = std::max(err, static_cast<double>(std::abs(s.rank - rank)));
        err = std::max(err, std::abs(s.value - std::sqrt(lambda(rank - 1))) / std::sqrt(lambda(0)));
        worst = std::max(worst, err);
        if (!(err <= 1e-8)) ++failures;
    }
    return make("linalg_identities", failures, instances, fmt("max residual %.3g (tol 1e-8)", worst));
}

CheckResult check_theory(int instances, std::uint64_t seed) {
    Rng rng(seed);
    int failures = 0;
    double worst_balanced = 0.0;
    double worst_slack = std::numeric_limits<double>::infinity();
    double worst_perm = 0.0;
    for (int i = 0; i < instances; ++i) {
        const int depth = 1 + i % 3;
        const ShiftKind kind = kAllShiftKinds[static_cast<std::size_t>(i) % kAllShiftKinds.size()];
        const int n = uniform_int(rng, 6, 15);
        const int d_x = uniform_int(rng, 2, 5);
        const int d_y = uniform_int(rng, 1, 2);
        const Problem prob = random_problem(rng.next_u64(), n, d_x, d_y, depth, kind, uniform_int(rng, 2, n));
        Dims dims{d_x};
        for (int l = 0; l < depth; ++l) dims.push_back(5);
        dims.push_back(d_y);
        const Eigen::MatrixXd target = min_norm_solution(prob);
        const double emin = energy_min_value(prob);
        bool ok = true;

        const double balanced = balanced_init(dims, target, prob).squared_norm();
        const double balanced_err = std::abs(balanced - emin) / std::max(1.0, emin);
        worst_balanced = std::max(worst_balanced, balanced_err);
        if (balanced_err > 1e-8) ok = false;

        // Unbalanced factorizations: rescale the balanced layers by c and 1/c,
        // then mix hidden coordinates with an invertible matrix.
        const WeightStack base = balanced_init(dims, target, prob);
        for (int j = 0; j < 5; ++j) {
            std::vector<Eigen::MatrixXd> layers = base.layers();
            for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
                const int width = static_cast<int>(layers[l].rows());
                Eigen::MatrixXd a = Eigen::MatrixXd::Identity(width, width) + 0.3 * normal_matrix(rng, width, width);
                layers[l] = a * layers[l];
                layers[l + 1] = layers[l + 1] * a.inverse();
            }
            const WeightStack w(std::move(layers));
            const double product_err = (collapsed_product(w) - target).norm() / std::max(1.0, target.norm());
            const double slack = (w.squared_norm() - emin) / std::max(1.0, emin);
            worst_slack = std::min(worst_slack, slack);
            if (product_err > 1e-8 || slack < -1e-8) ok = false;
        }

        // sigma_small does not depend on the order of the labeled nodes.
        std::vector<int> order(prob.labeled().size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
        std::vector<int> shuffled;
        for (int k : order) shuffled.push_back(prob.labeled()[static_cast<std::size_t>(k)]);
        const Problem permuted = prob.with_labels(select_columns(prob.labels(), order), shuffled);
        const double s0 = sigma_small(prob.restricted()).value;
        const double perm = std::abs(sigma_small(permuted.restricted()).value - s0) / s0;
        worst_perm = std::max(worst_perm, perm);
        if (perm > 1e-10) ok = false;
        if (!ok) ++failures;
    }
    return make("theory_energy_and_permutation", failures, instances,
                fmt("balanced energy err %.3g, min unbalanced slack %.3g, sigma permutation err %.3g", worst_balanced,
                    worst_slack, worst_perm));
}

CheckResult check_sparsity_ordering(std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.graph.model = "er";
    cfg.graph.n = 200;
    cfg.graph_sweep = GraphSweep{"p", {0.03, 0.1, 0.3}};
    cfg.shifts = {ShiftKind::Laplacian};
    cfg.d_x = 50;
    cfg.depth = 2;
    cfg.hidden = {32, 32};
    cfg.init.scheme = "theorem";
    cfg.init.a = 2.0;
    cfg.n_bar = {150};
    cfg.seed = seed;
    cfg.dynamics.method = "flow";
    cfg.dynamics.t_max = 1e6;
    cfg.dynamics.options.tol = 1e-4;
    cfg.time_to_level = 1e-3;
    const auto results = convergence_sweep(cfg);

    std::string detail;
    bool ok = results.size() == 3;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i].row;
        if (!r.error.empty() || !r.time_to_level) ok = false;
        detail += fmt("p=%.2f sigma=%.4g t=%.4g; ", r.param_value, r.report.sigma_small, r.time_to_level.value_or(-1.0));
        if (i > 0) {
            const auto& prev = results[i - 1].row;
            // Denser graph: larger sigma_small and shorter time.
            if (!(r.report.sigma_small > prev.report.sigma_small)) ok = false;
            if (r.time_to_level && prev.time_to_level && !(*r.time_to_level < *prev.time_to_level)) ok = false;
        }
    }
    return CheckResult{"sparsity_ordering", ok, detail + fmt("seed %llu", static_cast<unsigned long long>(seed))};
}

std::vector<CheckResult> check_sigma_scaling(int replications, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.graph.model = "er";
    cfg.graph.n = 200;
    cfg.graph.p = 0.1;
    cfg.shifts = {ShiftKind::Adjacency};
    cfg.d_x = 30;
    cfg.depth = 2;
    cfg.replications = replications;
    cfg.seed = seed;
    cfg.n_bar = {5, 10, 15, 20, 25, 30};
    for (int nb = 40; nb <= 180; nb += 20) cfg.n_bar.push_back(nb);
    const auto rows = sigma_sweep(cfg);

    int band_failures = 0;
    int band_total = 0;
    double worst_band = 0.0;
    std::string band_detail;
    for (const auto& r : rows) {
        if (!r.error.empty()) ++band_failures;
        if (r.n_bar < 40) continue;
        ++band_total;
        const double rel = (r.sigma_mean - r.predicted) / r.predicted;
        if (std::abs(rel) > std::abs(worst_band)) worst_band = rel;
        if (!(std::abs(rel) <= 0.1)) {
            ++band_failures;
            band_detail += fmt("n_bar=%d %+.3f ", r.n_bar, rel);
        }
    }

    // Violations of the expected direction on each side of n_bar = d_x.
    int down_violations = 0;
    int up_violations = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].n_bar <= cfg.d_x) {
            if (rows[i].sigma_mean > rows[i - 1].sigma_mean) ++down_violations;
        } else if (rows[i].sigma_mean < rows[i - 1].sigma_mean) {
            ++up_violations;
        }
    }
    CheckResult band = make("sigma_scaling_band", band_failures, band_total,
                            fmt("worst relative deviation %+.3f (tol 0.1)%s%s", worst_band,
                                band_detail.empty() ? "" : "; outside: ", band_detail.c_str()));
    CheckResult switch_check{"sigma_monotonicity_switch", down_violations <= 1 && up_violations <= 1,
                             fmt("violations: %d below d_x, %d above d_x (allowed 1 each)", down_violations,
                                 up_violations)};
    return {band, switch_check};
}

std::vector<CheckResult> run_verify_suite(std::uint64_t seed) {
    std::vector<CheckResult> out;
    out.push_back(check_gradients(60, seed + 1));
    out.push_back(check_linalg(50, seed + 2));
    out.push_back(check_global_min(30, 20, seed + 3));
    out.push_back(check_flow_envelope(6, seed + 4, 80));
    out.push_back(check_descent_contraction(6, seed + 5, 80));
    out.push_back(check_energy_optimum(3, seed + 6));
    out.push_back(check_theory(20, seed + 7));
    out.push_back(check_sparsity_ordering(seed));
    return out;
}

}  // namespace lgnn

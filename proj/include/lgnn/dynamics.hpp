#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "lgnn/gnn.hpp"
#include "lgnn/init.hpp"
#include "lgnn/weights.hpp"

namespace lgnn {

enum class RunStatus { Converged, BudgetExhausted, StepUnderflow };
std::string_view to_string(RunStatus status);

struct Sample {
    double t = 0.0;  // time for flows, iteration count for descent
    double loss = 0.0;
    double rel_loss = 0.0;  // (L - L~) / (L0 - L~)
    double grad_norm_sq = 0.0;
    double balance_residual = 0.0;
    double step = 0.0;      // step that produced this sample (0 for the first)
    double drift_sq = 0.0;  // sum_l ||W_l - W_l(0)||_F^2
};

struct Trajectory {
    explicit Trajectory(WeightStack start) : final_weights(std::move(start)) {}

    std::vector<Sample> samples;
    WeightStack final_weights;
    RunStatus status = RunStatus::BudgetExhausted;
    /// False only if some accepted step increased the loss (forced-eta descent).
    bool monotone = true;
    double loss0 = 0.0;
    double loss_min = 0.0;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    /// Descent only: the fixed step size used.
    double eta = 0.0;
    /// Descent only: rho_k = (L_{k+1} - L~) / (L_k - L~) for every iteration.
    std::vector<double> contraction;

    const Sample& last() const { return samples.back(); }
    /// First sample time with rel_loss <= level, if any.
    std::optional<double> time_to(double level) const;
};

/// Time stepping of the plain flow. The normalized flow always uses Euler.
enum class FlowScheme {
    /// W' = W - h G((W + W') / 2), solved by fixed-point iteration. Keeps
    /// W_{l+1}^T W_{l+1} - W_l W_l^T constant up to the solver tolerance.
    Midpoint,
    Euler,
};
std::string_view to_string(FlowScheme scheme);
/// "midpoint" | "euler"; throws ParameterError otherwise.
FlowScheme parse_flow_scheme(std::string_view name);

struct DynamicsOptions {
    FlowScheme scheme = FlowScheme::Midpoint;
    double h0 = 1e-3;
    double h_max = 1.0;
    double h_min = 1e-14;
    /// Stop once rel_loss <= tol.
    double tol = 1e-10;
    /// Accept a step h iff L(W - h D) <= L(W) - c h <G, D>, with G taken at
    /// the midpoint for the midpoint scheme.
    double armijo_c = 0.5;
    double growth = 1.5;
    /// Cap on accepted plus rejected trial steps for one run.
    std::size_t max_steps = 5'000'000;
    /// Every accepted step is recorded up to this many samples, then
    /// recording thins geometrically by `thinning` in the step index.
    std::size_t max_samples = 10'000;
    double thinning = 1.02;
    /// Descent: initial trial step for the automatic choice.
    double eta0 = 1.0;
};

/// dW/dt = -grad L with Armijo acceptance (scheme per opts.scheme); stops at
/// t = t_max, at rel_loss <= tol, or when the step falls below h_min.
Trajectory flow_integrate(const WeightStack& w0, const Problem& prob, double t_max, const DynamicsOptions& opts = {});

/// Same controller on dW_l/dt = -G_l / ||G_l||_F; layers with ||G_l||_F <= 1e-14
/// stay put.
Trajectory normalized_flow_integrate(const WeightStack& w0, const Problem& prob, double t_max,
                                     const DynamicsOptions& opts = {});

/// Fixed-step gradient descent. Without `eta` the step starts at
/// auto_step_size and is halved, restarting from W0, until every iteration
/// satisfies L(W_{k+1}) <= L(W_k) - eta |G_k|^2 / 2.
Trajectory gradient_descent(const WeightStack& w0, const Problem& prob, std::optional<double> eta, std::size_t k_max,
                            const DynamicsOptions& opts = {});

/// Largest opts.eta0 / 2^j with L(W0 - eta G) <= L(W0) - eta |G|^2 / 2.
double auto_step_size(const WeightStack& w0, const Problem& prob, const DynamicsOptions& opts = {});

/// Iteration count after which descent with step eta is guaranteed to have
/// L_k - L~ <= eps: the smallest k with
///   k >= log((L0 - L~) / eps) / log(1 / (1 - eta alpha_lower / 2)),
/// and 0 when eps >= L0 - L~ for any positive eta. Otherwise throws
/// ParameterError when eps <= 0 or eta lies outside (0, 2 / alpha_lower).
std::size_t iterations_to_epsilon(const InitReport& report, double eta, double loss0, double loss_min, double eps);

}  // namespace lgnn

#include "lgnn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lgnn/error.hpp"
#include "lgnn/grad.hpp"
#include "lgnn/linalg.hpp"

namespace lgnn {

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Converged:
            return "converged";
        case RunStatus::BudgetExhausted:
            return "budget_exhausted";
        case RunStatus::StepUnderflow:
            return "step_underflow";
    }
    return "unknown";
}

std::string_view to_string(FlowScheme scheme) {
    return scheme == FlowScheme::Midpoint ? "midpoint" : "euler";
}

FlowScheme parse_flow_scheme(std::string_view name) {
    if (name == "midpoint") return FlowScheme::Midpoint;
    if (name == "euler") return FlowScheme::Euler;
    throw ParameterError("unknown flow scheme '" + std::string(name) + "' (expected midpoint or euler)");
}

std::optional<double> Trajectory::time_to(double level) const {
    for (const auto& s : samples) {
        if (s.rel_loss <= level) return s.t;
    }
    return std::nullopt;
}

namespace {

constexpr double kRoundoffGap = 1e-28;

class Recorder {
public:
    Recorder(const WeightStack& w0, const Problem& prob, const DynamicsOptions& opts, Trajectory& out)
        : w0_(w0), opts_(opts), out_(out) {
        out_.loss0 = loss(w0, prob);
        out_.loss_min = global_min_loss(prob).value;
        gap0_ = excess_loss(w0, prob);
        // A gap at roundoff level of the label scale counts as already converged.
        if (gap0_ <= kRoundoffGap * prob.labels().squaredNorm() / prob.m()) gap0_ = 0.0;
        next_mark_ = static_cast<double>(opts_.max_samples);
    }

    double gap0() const { return gap0_; }
    double relative(double excess) const { return gap0_ > 0.0 ? excess / gap0_ : 0.0; }

    Sample make(double t, double loss_value, double excess, double grad_norm_sq, double step, const WeightStack& w) const {
        return Sample{t, loss_value, relative(excess), grad_norm_sq, balancedness_residual(w), step, w.squared_distance(w0_)};
    }

    /// Records the sample for accepted step `k` unless thinning skips it.
    void offer(std::size_t k, const Sample& s) {
        if (out_.samples.size() < opts_.max_samples || static_cast<double>(k) >= next_mark_) {
            out_.samples.push_back(s);
            if (out_.samples.size() > opts_.max_samples) next_mark_ = std::max(next_mark_ + 1.0, next_mark_ * opts_.thinning);
            pending_ = false;
        } else {
            pending_ = true;
            pending_sample_ = s;
        }
    }

    void finish() {
        if (pending_) out_.samples.push_back(pending_sample_);
        pending_ = false;
    }

private:
    const WeightStack& w0_;
    const DynamicsOptions& opts_;
    Trajectory& out_;
    double gap0_ = 0.0;
    double next_mark_ = 0.0;
    bool pending_ = false;
    Sample pending_sample_;
};

void check_run_inputs(const WeightStack& w0, const Problem& prob, double budget, const char* what) {
    prob.check_compatible(w0);
    if (!(budget > 0.0)) throw ParameterError(std::string(what) + ": budget must be positive");
}

enum class Direction { Gradient, LayerNormalized };

constexpr int kMidpointIterations = 60;
constexpr double kMidpointTol = 1e-13;

// Solves z = w - h G((w + z) / 2). Returns the gradient norm at the midpoint
// through `slope`, or nullopt if the iteration does not settle.
std::optional<WeightStack> midpoint_step(const WeightStack& w, const GradientStack& g, double h, const Problem& prob,
                                         double& slope) {
    WeightStack z = w.axpy(h, g.layers);
    const double tol = kMidpointTol * std::max(1.0, std::sqrt(w.squared_norm()));
    for (int it = 0; it < kMidpointIterations; ++it) {
        std::vector<Eigen::MatrixXd> mid;
        mid.reserve(w.num_layers());
        for (std::size_t l = 0; l < w.num_layers(); ++l) mid.push_back(0.5 * (w.layer(l) + z.layer(l)));
        const GradientStack gm = gradients(WeightStack(std::move(mid)), prob);
        WeightStack next = w.axpy(h, gm.layers);
        const double change = std::sqrt(next.squared_distance(z));
        z = std::move(next);
        if (!std::isfinite(change)) return std::nullopt;
        if (change <= tol) {
            slope = gm.norm_sq();
            return z;
        }
    }
    return std::nullopt;
}

Trajectory integrate(const WeightStack& w0, const Problem& prob, double t_max, const DynamicsOptions& opts,
                     Direction mode) {
    check_run_inputs(w0, prob, t_max, "flow_integrate");
    Trajectory out(w0);
    Recorder rec(w0, prob, opts, out);

    WeightStack w = w0;
    double t = 0.0;
    double h = opts.h0;
    double current_loss = out.loss0;
    double current_excess = rec.gap0();
    GradientStack g = gradients(w, prob);
    double gn = g.norm_sq();
    out.samples.push_back(rec.make(0.0, current_loss, current_excess, gn, 0.0, w));

    auto done = [&] { return rec.relative(current_excess) <= opts.tol; };
    if (done()) {
        out.status = RunStatus::Converged;
        return out;
    }

    std::size_t trials = 0;
    std::vector<Eigen::MatrixXd> direction;
    while (true) {
        if (t >= t_max) {
            out.status = RunStatus::BudgetExhausted;
            break;
        }
        if (trials >= opts.max_steps) {
            out.status = RunStatus::BudgetExhausted;
            break;
        }
        // <G, D>: |G|^2 for the plain flow, sum_l ||G_l|| for the normalized one.
        double slope = 0.0;
        direction.clear();
        for (const auto& gl : g.layers) {
            if (mode == Direction::Gradient) {
                direction.push_back(gl);
            } else {
                const double norm = gl.norm();
                if (norm <= 1e-14) {
                    direction.push_back(Eigen::MatrixXd::Zero(gl.rows(), gl.cols()));
                } else {
                    direction.push_back(gl / norm);
                    slope += norm;
                }
            }
        }
        if (mode == Direction::Gradient) slope = gn;
        if (slope == 0.0) {
            // Stationary point: the flow stays here for the rest of the horizon.
            t = t_max;
            rec.offer(out.accepted_steps + 1, rec.make(t, current_loss, current_excess, gn, t_max, w));
            out.status = done() ? RunStatus::Converged : RunStatus::BudgetExhausted;
            break;
        }

        const double step = std::min(h, t_max - t);
        ++trials;
        std::optional<WeightStack> trial;
        double trial_slope = slope;
        if (mode == Direction::Gradient && opts.scheme == FlowScheme::Midpoint) {
            trial = midpoint_step(w, g, step, prob, trial_slope);
        } else {
            trial = w.axpy(step, direction);
        }
        // L - L~ differs from L by a constant, so the acceptance test runs on
        // the excess, which keeps full relative precision near the optimum.
        const double trial_excess = trial ? excess_loss(*trial, prob) : std::numeric_limits<double>::quiet_NaN();
        if (std::isfinite(trial_excess) && trial_excess <= current_excess - opts.armijo_c * step * trial_slope) {
            w = std::move(*trial);
            t = (step == t_max - t) ? t_max : t + step;
            current_loss = loss(w, prob);
            current_excess = trial_excess;
            g = gradients(w, prob);
            gn = g.norm_sq();
            ++out.accepted_steps;
            rec.offer(out.accepted_steps, rec.make(t, current_loss, current_excess, gn, step, w));
            if (done()) {
                out.status = RunStatus::Converged;
                break;
            }
            if (step == h) h = std::min(h * opts.growth, opts.h_max);
        } else {
            ++out.rejected_steps;
            h = step / 2.0;
            if (h < opts.h_min) {
                out.status = RunStatus::StepUnderflow;
                break;
            }
        }
    }
    rec.finish();
    out.final_weights = std::move(w);
    return out;
}

}  // namespace

Trajectory flow_integrate(const WeightStack& w0, const Problem& prob, double t_max, const DynamicsOptions& opts) {
    return integrate(w0, prob, t_max, opts, Direction::Gradient);
}

Trajectory normalized_flow_integrate(const WeightStack& w0, const Problem& prob, double t_max,
                                     const DynamicsOptions& opts) {
    return integrate(w0, prob, t_max, opts, Direction::LayerNormalized);
}

double auto_step_size(const WeightStack& w0, const Problem& prob, const DynamicsOptions& opts) {
    prob.check_compatible(w0);
    const GradientStack g = gradients(w0, prob);
    const double gn = g.norm_sq();
    const double l0 = excess_loss(w0, prob);
    double eta = opts.eta0;
    if (gn == 0.0) return eta;
    while (eta >= opts.h_min) {
        const double trial = excess_loss(w0.axpy(eta, g.layers), prob);
        if (std::isfinite(trial) && trial <= l0 - 0.5 * eta * gn) return eta;
        eta /= 2.0;
    }
    throw DomainError("auto step size underflowed below h_min");
}

namespace {

// One descent run at fixed eta. With `certify`, returns nullopt as soon as a
// step misses L_{k+1} - L~ <= L_k - L~ - eta |G_k|^2 / 2.
std::optional<Trajectory> descent_run(const WeightStack& w0, const Problem& prob, double eta, std::size_t k_max,
                                      const DynamicsOptions& opts, bool certify) {
    Trajectory out(w0);
    Recorder rec(w0, prob, opts, out);
    out.eta = eta;

    WeightStack w = w0;
    double current_loss = out.loss0;
    double current_excess = rec.gap0();
    GradientStack g = gradients(w, prob);
    double gn = g.norm_sq();
    out.samples.push_back(rec.make(0.0, current_loss, current_excess, gn, 0.0, w));
    out.status = RunStatus::BudgetExhausted;
    if (rec.relative(current_excess) <= opts.tol) {
        out.status = RunStatus::Converged;
        return out;
    }

    for (std::size_t k = 0; k < k_max; ++k) {
        WeightStack next = w.axpy(eta, g.layers);
        const double next_loss = loss(next, prob);
        const double next_excess = excess_loss(next, prob);
        if (!std::isfinite(next_loss) || !std::isfinite(next_excess)) {
            if (certify) return std::nullopt;
            out.monotone = false;
            break;
        }
        if (certify && next_excess > current_excess - 0.5 * eta * gn + 1e-12 * current_excess) return std::nullopt;
        if (next_excess > current_excess) out.monotone = false;
        out.contraction.push_back(current_excess > 0.0 ? next_excess / current_excess : 0.0);
        w = std::move(next);
        current_loss = next_loss;
        current_excess = next_excess;
        g = gradients(w, prob);
        gn = g.norm_sq();
        ++out.accepted_steps;
        rec.offer(out.accepted_steps, rec.make(static_cast<double>(k + 1), current_loss, current_excess, gn, eta, w));
        if (rec.relative(current_excess) <= opts.tol) {
            out.status = RunStatus::Converged;
            break;
        }
    }
    rec.finish();
    out.final_weights = std::move(w);
    return out;
}

}  // namespace

Trajectory gradient_descent(const WeightStack& w0, const Problem& prob, std::optional<double> eta, std::size_t k_max,
                            const DynamicsOptions& opts) {
    check_run_inputs(w0, prob, static_cast<double>(k_max), "gradient_descent");
    if (eta) {
        if (!(*eta > 0.0)) throw ParameterError("gradient_descent: eta must be positive");
        return *descent_run(w0, prob, *eta, k_max, opts, false);
    }
    for (double trial = auto_step_size(w0, prob, opts); trial >= opts.h_min; trial /= 2.0) {
        if (auto run = descent_run(w0, prob, trial, k_max, opts, true)) return std::move(*run);
    }
    throw DomainError("gradient_descent: no step size below h_min keeps sufficient decrease");
}

}  // namespace lgnn

namespace lgnn {

std::size_t iterations_to_epsilon(const InitReport& report, double eta, double loss0, double loss_min, double eps) {
    if (!(eps > 0.0)) throw ParameterError("iterations_to_epsilon: eps must be positive");
    const double x = eta * report.alpha_lower / 2.0;
    if (!(eta > 0.0)) throw ParameterError("iterations_to_epsilon: eta must be positive");
    const double gap = loss0 - loss_min;
    if (gap <= eps) return 0;
    if (!(x < 1.0)) throw ParameterError("iterations_to_epsilon: eta must lie in (0, 2 / alpha_lower)");
    const double k = std::log(gap / eps) / -std::log1p(-x);
    if (!std::isfinite(k)) throw DomainError("iterations_to_epsilon: rate underflows");
    return static_cast<std::size_t>(std::ceil(k - 1e-12));
}

}  // namespace lgnn

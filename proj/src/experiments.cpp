#include "lgnn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "lgnn/error.hpp"
#include "lgnn/linalg.hpp"
#include "lgnn/rng.hpp"
#include "lgnn/theory.hpp"

namespace lgnn {

Eigen::MatrixXd gaussian_features(int d_x, int n, std::uint64_t seed) {
    if (d_x < 1 || n < 1) throw ParameterError("gaussian_features: dimensions must be positive");
    Rng rng(seed);
    Eigen::MatrixXd x(d_x, n);
    for (int i = 0; i < d_x; ++i) {
        for (int j = 0; j < n; ++j) x(i, j) = rng.normal();
    }
    return x;
}

Eigen::MatrixXd synthetic_labels(const Eigen::MatrixXd& x, const Graph& g, double eps) {
    if (x.cols() != g.num_nodes()) throw ShapeError("synthetic_labels: feature columns must equal node count");
    const Eigen::RowVectorXd own = x.colwise().sum();
    Eigen::MatrixXd y = own;
    for (const auto& [u, v] : g.edges()) {
        y(0, u) += eps * own(v);
        y(0, v) += eps * own(u);
    }
    return y;
}

std::vector<int> sample_labeled_set(int n, int n_bar, std::uint64_t seed) {
    if (n_bar < 1) throw ParameterError("sample_labeled_set: n_bar must be at least 1");
    if (n_bar > n) throw ParameterError("sample_labeled_set: n_bar exceeds n");
    Rng rng(seed);
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < n_bar; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n_bar);
    std::sort(pool.begin(), pool.end());
    return pool;
}

namespace {

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

Eigen::MatrixXd parse_matrix_csv(const std::string& text, int n) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        std::vector<double> values(cells.size());
        std::size_t bad = cells.size();
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_double(cells[c], values[c])) {
                bad = c;
                break;
            }
        }
        if (bad != cells.size()) {
            if (first_content) {
                first_content = false;
                continue;  // header
            }
            throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(bad + 1) +
                             ": non-numeric cell \"" + cells[bad] + "\"");
        }
        first_content = false;
        if (static_cast<int>(values.size()) != n) {
            throw ShapeError("line " + std::to_string(line_no) + " has " + std::to_string(values.size()) +
                             " columns, expected " + std::to_string(n));
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError("matrix csv has no numeric rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), j) = rows[i][j];
    }
    return m;
}

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path, int n) { return parse_matrix_csv(slurp(path), n); }

FeatureTable parse_features_csv(const std::string& text, int n) {
    FeatureTable out{parse_matrix_csv(text, n), {}};
    for (Eigen::Index i = 0; i < out.matrix.rows(); ++i) {
        auto row = out.matrix.row(i);
        const double mean = row.mean();
        const double var = (row.array() - mean).square().mean();
        if (var == 0.0) {
            row.setZero();
            out.constant_rows.push_back(static_cast<int>(i));
        } else {
            row = (row.array() - mean) / std::sqrt(var);
        }
    }
    return out;
}

FeatureTable load_features_csv(const std::filesystem::path& path, int n) { return parse_features_csv(slurp(path), n); }

// ---------------------------------------------------------------------------

void GraphSpec::set_param(const std::string& name, double value) {
    auto as_int = [&](int& field) {
        if (value != std::floor(value)) throw ParameterError("graph parameter " + name + " must be an integer");
        field = static_cast<int>(value);
    };
    if (name == "p") p = value;
    else if (name == "q") q = value;
    else if (name == "n") as_int(n);
    else if (name == "k") as_int(k);
    else if (name == "m") as_int(m);
    else if (name == "n1") as_int(n1);
    else if (name == "n2") as_int(n2);
    else throw ParameterError("unknown graph parameter '" + name + "'");
}

double GraphSpec::get_param(const std::string& name) const {
    if (name == "p") return p;
    if (name == "q") return q;
    if (name == "n") return n;
    if (name == "k") return k;
    if (name == "m") return m;
    if (name == "n1") return n1;
    if (name == "n2") return n2;
    throw ParameterError("unknown graph parameter '" + name + "'");
}

Dims ExperimentConfig::dims(int d_y) const {
    Dims d{d_x};
    if (hidden.empty()) {
        for (int l = 0; l < depth; ++l) d.push_back(std::max(32, d_y));
    } else {
        if (static_cast<int>(hidden.size()) != depth) throw ParameterError("hidden must list exactly H widths");
        d.insert(d.end(), hidden.begin(), hidden.end());
    }
    d.push_back(d_y);
    validate_dims(d);
    return d;
}

std::vector<int> ExperimentConfig::n_bar_grid(int n) const {
    if (!n_bar.empty()) return n_bar;
    if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) throw ParameterError("labeled fraction must lie in (0,1]");
    return {std::max(1, static_cast<int>(std::lround(labeled_fraction * n)))};
}

Graph make_graph(const GraphSpec& spec, std::uint64_t seed) {
    if (spec.model == "er") return erdos_renyi(spec.n, spec.p, seed);
    if (spec.model == "knn") return knn_ring(spec.n, spec.k);
    if (spec.model == "sbm") return sbm(spec.n1, spec.n2, spec.p, spec.q, seed);
    if (spec.model == "ba") return barabasi_albert(spec.n, spec.m, seed);
    if (spec.model == "csv") {
        if (spec.edges_csv.empty()) throw ParameterError("graph model csv needs edges_csv");
        return load_edge_csv(spec.edges_csv).graph;
    }
    throw ParameterError("unknown graph model '" + spec.model + "' (expected er, knn, sbm, ba or csv)");
}

Dataset make_dataset(const ExperimentConfig& cfg, const GraphSpec& graph_spec) {
    Graph g = make_graph(graph_spec, cfg.graph_seed());
    const int n = g.num_nodes();
    Eigen::MatrixXd x;
    if (!cfg.features_csv.empty()) {
        x = load_features_csv(cfg.features_csv, n).matrix;
    } else {
        x = gaussian_features(cfg.d_x, n, cfg.feature_seed());
    }
    if (x.rows() != cfg.d_x) {
        throw ShapeError("features have " + std::to_string(x.rows()) + " rows but d_x = " + std::to_string(cfg.d_x));
    }
    Eigen::MatrixXd y = cfg.labels_csv.empty() ? synthetic_labels(x, g, cfg.label_eps) : load_matrix_csv(cfg.labels_csv, n);
    return Dataset{std::move(g), std::move(x), std::move(y)};
}

Problem make_problem(const Dataset& data, ShiftKind kind, int depth, const std::vector<int>& labeled) {
    return Problem(data.features, build_shift(data.graph, kind), depth, select_columns(data.labels, labeled), labeled);
}

WeightStack make_init(const InitSpec& spec, const Dims& dims, const Problem& prob) {
    if (spec.scheme == "theorem") return theorem_init(dims, spec.a ? *spec.a : min_admissible_a(prob));
    if (spec.scheme == "balanced") return balanced_init(dims, spec.target_scale * min_norm_solution(prob), prob);
    throw ParameterError("unknown init scheme '" + spec.scheme + "' (expected theorem or balanced)");
}

Trajectory run_dynamics(const DynamicsSpec& spec, const WeightStack& w0, const Problem& prob) {
    if (spec.method == "flow") return flow_integrate(w0, prob, spec.t_max, spec.options);
    if (spec.method == "normalized-flow") return normalized_flow_integrate(w0, prob, spec.t_max, spec.options);
    if (spec.method == "descent") return gradient_descent(w0, prob, spec.eta, spec.k_max, spec.options);
    throw ParameterError("unknown dynamics method '" + spec.method + "' (expected flow, normalized-flow or descent)");
}

bool flow_bound_holds(const Trajectory& traj, double alpha_lower, double slack) {
    for (const auto& s : traj.samples) {
        if (s.rel_loss > std::exp(-alpha_lower * s.t) * (1.0 + slack)) return false;
    }
    return true;
}

bool descent_bound_holds(const Trajectory& traj, double alpha_lower, double slack) {
    const double limit = 1.0 - traj.eta * alpha_lower / 2.0 + slack;
    for (double rho : traj.contraction) {
        if (rho > limit) return false;
    }
    return true;
}

bool safety_ball_holds(const Trajectory& traj, double r) {
    for (const auto& s : traj.samples) {
        if (s.drift_sq > r * r) return false;
    }
    return true;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& f) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------

namespace {

struct GraphPoint {
    GraphSpec spec;
    std::string param;
    double value = 0.0;
};

std::vector<GraphPoint> graph_points(const ExperimentConfig& cfg) {
    std::vector<GraphPoint> points;
    if (!cfg.graph_sweep) {
        points.push_back({cfg.graph, "", 0.0});
        return points;
    }
    for (double v : cfg.graph_sweep->values) {
        GraphPoint pt{cfg.graph, cfg.graph_sweep->param, v};
        pt.spec.set_param(pt.param, v);
        points.push_back(std::move(pt));
    }
    return points;
}

std::string bool_cell(bool b) { return b ? "1" : "0"; }

}  // namespace

std::vector<SigmaRow> sigma_sweep(const ExperimentConfig& cfg) {
    if (cfg.replications < 1) throw ParameterError("replications must be at least 1");
    struct Task {
        std::size_t point;
        ShiftKind shift;
        int n_bar;
    };
    const auto points = graph_points(cfg);
    std::vector<std::optional<Dataset>> data(points.size());
    std::vector<std::string> data_error(points.size());
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < points.size(); ++p) {
        int n = points[p].spec.n;
        try {
            data[p] = make_dataset(cfg, points[p].spec);
            n = data[p]->graph.num_nodes();
        } catch (const std::exception& e) {
            data_error[p] = e.what();
        }
        for (ShiftKind kind : cfg.shifts) {
            for (int nb : cfg.n_bar_grid(n)) tasks.push_back({p, kind, nb});
        }
    }

    std::vector<SigmaRow> rows(tasks.size());
    parallel_for(tasks.size(), cfg.jobs, [&](std::size_t i) {
        const Task& task = tasks[i];
        SigmaRow& row = rows[i];
        row.model = points[task.point].spec.model;
        row.param = points[task.point].param;
        row.param_value = points[task.point].value;
        row.shift = task.shift;
        row.d_x = cfg.d_x;
        row.depth = cfg.depth;
        row.n_bar = task.n_bar;
        row.replications = cfg.replications;
        row.sigma_mean = row.sigma_min = row.sigma_max = row.predicted = std::numeric_limits<double>::quiet_NaN();
        if (!data[task.point]) {
            row.error = data_error[task.point];
            return;
        }
        try {
            const Dataset& d = *data[task.point];
            row.n = d.graph.num_nodes();
            const Eigen::MatrixXd propagated = propagate(d.features, build_shift(d.graph, task.shift).matrix, cfg.depth);
            const SigmaPrediction pred = expected_sigma_small(propagated, task.n_bar);
            row.predicted = pred.value;
            row.in_regime = pred.in_regime;
            double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (int rep = 0; rep < cfg.replications; ++rep) {
                const auto labeled = sample_labeled_set(row.n, task.n_bar, cfg.label_seed(i, rep));
                const double s = sigma_small(select_columns(propagated, labeled)).value;
                sum += s;
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            row.sigma_mean = sum / cfg.replications;
            row.sigma_min = lo;
            row.sigma_max = hi;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return rows;
}

CsvTable sigma_table(const std::vector<SigmaRow>& rows) {
    CsvTable t({"model", "param", "param_value", "shift", "n", "d_x", "H", "n_bar", "replications", "sigma_mean",
                "sigma_min", "sigma_max", "predicted", "in_regime", "error"});
    for (const auto& r : rows) {
        t.add_row({r.model, r.param, format_double(r.param_value), std::string(to_string(r.shift)), std::to_string(r.n),
                   std::to_string(r.d_x), std::to_string(r.depth), std::to_string(r.n_bar),
                   std::to_string(r.replications), format_double(r.sigma_mean), format_double(r.sigma_min),
                   format_double(r.sigma_max), format_double(r.predicted), bool_cell(r.in_regime), r.error});
    }
    return t;
}

std::vector<ConvergenceResult> convergence_sweep(const ExperimentConfig& cfg) {
    if (cfg.replications < 1) throw ParameterError("replications must be at least 1");
    struct Task {
        std::size_t point;
        ShiftKind shift;
        int n_bar;
        int rep;
        std::size_t label_slot;
    };
    const auto points = graph_points(cfg);
    std::vector<std::optional<Dataset>> data(points.size());
    std::vector<std::string> data_error(points.size());
    std::vector<Task> tasks;
    std::size_t slot = 0;
    for (std::size_t p = 0; p < points.size(); ++p) {
        int n = points[p].spec.n;
        try {
            data[p] = make_dataset(cfg, points[p].spec);
            n = data[p]->graph.num_nodes();
        } catch (const std::exception& e) {
            data_error[p] = e.what();
        }
        // Labeled sets depend on (graph point, n_bar, replication) only, so every
        // shift kind is trained on the same nodes.
        for (int nb : cfg.n_bar_grid(n)) {
            for (ShiftKind kind : cfg.shifts) {
                for (int rep = 0; rep < cfg.replications; ++rep) tasks.push_back({p, kind, nb, rep, slot});
            }
            ++slot;
        }
    }

    std::vector<std::optional<ConvergenceResult>> results(tasks.size());
    parallel_for(tasks.size(), cfg.jobs, [&](std::size_t i) {
        const Task& task = tasks[i];
        ConvergenceRow row;
        row.model = points[task.point].spec.model;
        row.param = points[task.point].param;
        row.param_value = points[task.point].value;
        row.shift = task.shift;
        row.n_bar = task.n_bar;
        row.replication = task.rep;
        row.init = cfg.init.scheme;
        row.method = cfg.dynamics.method;
        row.final_rel_loss = std::numeric_limits<double>::quiet_NaN();
        std::optional<Trajectory> traj;
        if (!data[task.point]) {
            row.error = data_error[task.point];
            results[i] = ConvergenceResult{std::move(row), std::nullopt};
            return;
        }
        try {
            const Dataset& d = *data[task.point];
            row.n = d.graph.num_nodes();
            row.edges = d.graph.num_edges();
            const auto labeled = sample_labeled_set(row.n, task.n_bar, cfg.label_seed(task.label_slot, task.rep));
            const Problem prob = make_problem(d, task.shift, cfg.depth, labeled);
            const Dims dims = cfg.dims(prob.output_dim());
            const WeightStack w0 = make_init(cfg.init, dims, prob);
            if (cfg.init.scheme == "theorem") row.a = w0.layer(w0.num_layers() - 1)(0, 0);
            row.report = validate_init(w0, prob);
            traj = run_dynamics(cfg.dynamics, w0, prob);
            row.eta = traj->eta;
            row.final_rel_loss = traj->last().rel_loss;
            row.final_t = traj->last().t;
            row.steps = traj->accepted_steps;
            row.status = traj->status;
            row.time_to_level = traj->time_to(cfg.time_to_level);
            row.bound_ok = cfg.dynamics.method == "descent" ? descent_bound_holds(*traj, row.report.alpha_lower)
                                                            : flow_bound_holds(*traj, row.report.alpha_lower);
            row.ball_ok = safety_ball_holds(*traj, row.report.r);
            row.monotone = traj->monotone;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        results[i] = ConvergenceResult{std::move(row), std::move(traj)};
    });

    std::vector<ConvergenceResult> out;
    out.reserve(results.size());
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

CsvTable convergence_table(const std::vector<ConvergenceResult>& results) {
    CsvTable t({"model", "param", "param_value", "shift", "n", "edges", "n_bar", "replication", "init", "a", "beta",
                "r", "sigma_small", "alpha_lower", "init_valid", "method", "eta", "L0", "L_tilde", "final_rel_loss",
                "final_t", "steps", "status", "time_to_level", "bound_ok", "ball_ok", "monotone", "error"});
    for (const auto& res : results) {
        const auto& r = res.row;
        t.add_row({r.model, r.param, format_double(r.param_value), std::string(to_string(r.shift)), std::to_string(r.n),
                   std::to_string(r.edges), std::to_string(r.n_bar), std::to_string(r.replication), r.init,
                   format_double(r.a), format_double(r.report.beta), format_double(r.report.r),
                   format_double(r.report.sigma_small), format_double(r.report.alpha_lower), bool_cell(r.report.valid),
                   r.method, format_double(r.eta), format_double(r.report.loss0), format_double(r.report.loss_min),
                   format_double(r.final_rel_loss), format_double(r.final_t), std::to_string(r.steps),
                   std::string(to_string(r.status)), r.time_to_level ? format_double(*r.time_to_level) : "",
                   bool_cell(r.bound_ok), bool_cell(r.ball_ok), bool_cell(r.monotone), r.error});
    }
    return t;
}

CsvTable trajectory_table(const Trajectory& traj) {
    CsvTable t({"t", "loss", "rel_loss", "grad_norm_sq", "balance_residual"});
    for (const auto& s : traj.samples) {
        t.add_row({format_double(s.t), format_double(s.loss), format_double(s.rel_loss), format_double(s.grad_norm_sq),
                   format_double(s.balance_residual)});
    }
    return t;
}

}  // namespace lgnn

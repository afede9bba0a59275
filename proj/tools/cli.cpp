#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "lgnn/dynamics.hpp"
#include "lgnn/error.hpp"
#include "lgnn/experiments.hpp"
#include "lgnn/linalg.hpp"
#include "lgnn/theory.hpp"
#include "lgnn/verify.hpp"

namespace lgnn::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::vector<std::string> shifts;
    std::string model;
    std::optional<int> n, k, n1, n2, m;
    std::optional<double> p, q;
    std::string edges;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "JSON experiment config");
    cmd->add_option("--out", o.out, "Output directory (overrides config output)");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--shift", o.shifts, "Shift kind: adj, sl-adj, nsl-adj, row-sl, col-sl, lap, nlap");
    cmd->add_option("--model", o.model, "Graph model")->check(CLI::IsMember({"er", "knn", "sbm", "ba", "csv"}));
    cmd->add_option("--n", o.n, "Number of nodes");
    cmd->add_option("--p", o.p, "Edge probability (er, sbm within blocks)");
    cmd->add_option("--q", o.q, "Edge probability across sbm blocks");
    cmd->add_option("--k", o.k, "Ring neighbours (knn)");
    cmd->add_option("--n1", o.n1, "First sbm block size");
    cmd->add_option("--n2", o.n2, "Second sbm block size");
    cmd->add_option("--m", o.m, "Edges per new node (ba)");
    cmd->add_option("--edges", o.edges, "Edge CSV for model csv");
    cmd->add_flag("--quiet", o.quiet, "No progress on standard error");
}

ExperimentConfig resolve(const Options& o) {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (!o.out.empty()) cfg.output = o.out;
    if (o.seed) cfg.seed = *o.seed;
    if (o.jobs) cfg.jobs = *o.jobs;
    if (!o.shifts.empty()) {
        cfg.shifts.clear();
        for (const auto& s : o.shifts) cfg.shifts.push_back(parse_shift_kind(s));
    }
    if (!o.model.empty()) cfg.graph.model = o.model;
    if (o.n) cfg.graph.n = *o.n;
    if (o.p) cfg.graph.p = *o.p;
    if (o.q) cfg.graph.q = *o.q;
    if (o.k) cfg.graph.k = *o.k;
    if (o.n1) cfg.graph.n1 = *o.n1;
    if (o.n2) cfg.graph.n2 = *o.n2;
    if (o.m) cfg.graph.m = *o.m;
    if (!o.edges.empty()) cfg.graph.edges_csv = o.edges;
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("io", "cannot write " + path.string());
    f << text;
    if (!f) throw Error("io", "write failed for " + path.string());
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_json(const InitReport& r) {
    json j{{"beta", number(r.beta)},
           {"r", number(r.r)},
           {"sigma_small", number(r.sigma_small)},
           {"alpha_lower", number(r.alpha_lower)},
           {"loss0", number(r.loss0)},
           {"loss_min", number(r.loss_min)},
           {"condition_lhs", number(r.condition_lhs)},
           {"condition_rhs", number(r.condition_rhs)},
           {"valid", r.valid}};
    if (r.balanced) {
        j["balanced"] = {{"kbar", r.balanced->kbar},
                         {"sigma_kbar", number(r.balanced->sigma_kbar)},
                         {"lhs", number(r.balanced->lhs)},
                         {"rhs", number(r.balanced->rhs)},
                         {"holds", r.balanced->holds}};
    } else {
        j["balanced"] = nullptr;
    }
    return j;
}

// The first grid point of a config: first graph-sweep value, first shift,
// first n_bar and replication 0. Matches row 0 of `sweep`.
struct SingleRun {
    Dataset data;
    Problem problem;
    Dims dims;
    WeightStack w0;
};

SingleRun single_run(const ExperimentConfig& cfg) {
    GraphSpec spec = cfg.graph;
    if (cfg.graph_sweep && !cfg.graph_sweep->values.empty()) {
        spec.set_param(cfg.graph_sweep->param, cfg.graph_sweep->values.front());
    }
    Dataset data = make_dataset(cfg, spec);
    const int n = data.graph.num_nodes();
    const auto labeled = sample_labeled_set(n, cfg.n_bar_grid(n).front(), cfg.label_seed(0, 0));
    Problem prob = make_problem(data, cfg.shifts.front(), cfg.depth, labeled);
    Dims dims = cfg.dims(prob.output_dim());
    WeightStack w0 = make_init(cfg.init, dims, prob);
    return SingleRun{std::move(data), std::move(prob), std::move(dims), std::move(w0)};
}

class Progress {
public:
    Progress(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
    void operator()(const std::string& line) const {
        if (!quiet_) err_ << "[lgnn] " << line << '\n';
    }

private:
    std::ostream& err_;
    bool quiet_;
};

int cmd_gen_graph(const Options& o, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = resolve(o);
    const Progress progress(err, o.quiet);
    const Graph g = make_graph(cfg.graph, cfg.graph_seed());
    const fs::path dir = cfg.output;
    fs::create_directories(dir);
    write_edge_csv(g, dir / "edges.csv");
    json params = json::object();
    for (const auto& [k, v] : g.meta().params) params[k] = v;
    const json meta{{"model", cfg.graph.model},
                    {"params", params},
                    {"seed", cfg.graph_seed()},
                    {"nodes", g.num_nodes()},
                    {"edges", g.num_edges()}};
    write_text(dir / "graph.json", meta.dump(2) + "\n");
    progress("wrote " + (dir / "edges.csv").string());
    out << meta.dump() << '\n';
    return 0;
}

int cmd_sigma_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = resolve(o);
    const Progress progress(err, o.quiet);
    progress("sigma sweep, " + std::to_string(cfg.replications) + " replications per row");
    const auto rows = sigma_sweep(cfg);
    const fs::path dir = cfg.output;
    write_text(dir / "config.json", config_to_json(cfg));
    sigma_table(rows).write(dir / "sigma_sweep.csv");
    std::size_t errors = 0;
    for (const auto& r : rows) errors += r.error.empty() ? 0 : 1;
    progress("wrote " + (dir / "sigma_sweep.csv").string());
    out << json{{"rows", rows.size()}, {"errors", errors}, {"csv", (dir / "sigma_sweep.csv").string()}}.dump() << '\n';
    return errors == 0 ? 0 : 1;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = resolve(o);
    const Progress progress(err, o.quiet);
    const SingleRun run = single_run(cfg);
    const InitReport report = validate_init(run.w0, run.problem);
    progress("init " + cfg.init.scheme + " dims " + format_dims(run.dims) + (report.valid ? " (valid)" : " (not valid)"));
    const Trajectory traj = run_dynamics(cfg.dynamics, run.w0, run.problem);
    const Sample& last = traj.last();
    const bool descent = cfg.dynamics.method == "descent";
    const bool bound_ok = descent ? descent_bound_holds(traj, report.alpha_lower) : flow_bound_holds(traj, report.alpha_lower);
    // Flow: exp(-alpha T); descent: (1 - eta alpha / 2)^k.
    const double bound_at_end = descent ? std::pow(1.0 - traj.eta * report.alpha_lower / 2.0, last.t)
                                        : std::exp(-report.alpha_lower * last.t);

    const fs::path dir = cfg.output;
    write_text(dir / "config.json", config_to_json(cfg));
    write_text(dir / "init_report.json", report_json(report).dump(2) + "\n");
    trajectory_table(traj).write(dir / "trajectory.csv");
    const std::optional<double> t_level = traj.time_to(cfg.time_to_level);
    const json summary{{"method", cfg.dynamics.method},
                       {"status", std::string(to_string(traj.status))},
                       {"init_valid", report.valid},
                       {"final_t", number(last.t)},
                       {"final_loss", number(last.loss)},
                       {"final_rel_loss", number(last.rel_loss)},
                       {"bound_at_final_t", number(bound_at_end)},
                       {"bound_ok", bound_ok},
                       {"ball_ok", safety_ball_holds(traj, report.r)},
                       {"monotone", traj.monotone},
                       {"accepted_steps", traj.accepted_steps},
                       {"rejected_steps", traj.rejected_steps},
                       {"eta", number(traj.eta)},
                       {"time_to_level", t_level ? json(*t_level) : json(nullptr)}};
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    progress("status " + std::string(to_string(traj.status)) + ", wrote " + (dir / "trajectory.csv").string());
    out << summary.dump() << '\n';
    return 0;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = resolve(o);
    const Progress progress(err, o.quiet);
    progress("convergence sweep, method " + cfg.dynamics.method + ", jobs " + std::to_string(cfg.jobs));
    const auto results = convergence_sweep(cfg);
    const fs::path dir = cfg.output;
    write_text(dir / "config.json", config_to_json(cfg));
    convergence_table(results).write(dir / "convergence.csv");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].row.error.empty()) ++errors;
        if (cfg.write_trajectories && results[i].trajectory) {
            trajectory_table(*results[i].trajectory).write(dir / "trajectories" / ("row_" + std::to_string(i) + ".csv"));
        }
    }
    progress("wrote " + (dir / "convergence.csv").string());
    out << json{{"rows", results.size()}, {"errors", errors}, {"csv", (dir / "convergence.csv").string()}}.dump()
        << '\n';
    return errors == 0 ? 0 : 1;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
    const Progress progress(err, o.quiet);
    progress("running invariant suite");
    bool all = true;
    for (const auto& r : run_verify_suite(o.seed.value_or(0))) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        all = all && r.passed;
    }
    return all ? 0 : 1;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream&) {
    const ExperimentConfig cfg = resolve(o);
    const SingleRun run = single_run(cfg);
    const Problem& prob = run.problem;
    const RateBundle bundle = rate_bundle(run.w0, prob);
    const InitReport report = validate_init(run.w0, prob);
    const GlobalMinimum gmin = global_min_loss(prob, run.dims);

    json iterations = nullptr;
    std::string iterations_note;
    const double eta = cfg.dynamics.eta ? *cfg.dynamics.eta : auto_step_size(run.w0, prob, cfg.dynamics.options);
    const double gap = report.loss0 - report.loss_min;
    try {
        const double eps = gap > 0.0 ? cfg.dynamics.options.tol * gap : cfg.dynamics.options.tol;
        iterations = iterations_to_epsilon(report, eta, report.loss0, report.loss_min, eps);
    } catch (const Error& e) {
        iterations_note = e.what();
    }
    json j{{"rate_bundle",
            {{"sigma_small_restricted", number(bundle.sigma_small_restricted)},
             {"beta", number(bundle.beta)},
             {"m", number(bundle.m)},
             {"alpha_lower", number(bundle.alpha_lower)},
             {"descent_factor", number(bundle.descent_factor(eta))}}},
           {"min_admissible_a", number(min_admissible_a(prob))},
           {"energy_min_value", number(energy_min_value(prob))},
           {"global_min_loss", number(gmin.value)},
           {"global_min_exact", gmin.exact},
           {"eta", number(eta)},
           {"eps_relative", number(cfg.dynamics.options.tol)},
           {"iterations_to_epsilon", iterations},
           {"init_report", report_json(report)}};
    if (!iterations_note.empty()) j["iterations_note"] = iterations_note;
    if (!o.out.empty()) write_text(fs::path(o.out) / "predict.json", j.dump(2) + "\n");
    out << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Linear GNN training dynamics laboratory", "lgnn"};
    app.require_subcommand(1);
    Options o;
    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const Options&, std::ostream&, std::ostream&);
    };
    const Sub subs[] = {
        {"gen-graph", "Write an edge CSV and graph.json from a model spec", cmd_gen_graph},
        {"sigma-sweep", "sigma_small of restricted features over labeled-set sizes", cmd_sigma_sweep},
        {"train", "One flow, normalized-flow or descent run", cmd_train},
        {"sweep", "Convergence sweep over graph parameters, shifts and n_bar", cmd_sweep},
        {"verify", "Run the invariant suite; nonzero exit on any failure", cmd_verify},
        {"predict", "Rate constants and iteration bounds for a config", cmd_predict},
    };
    std::vector<std::pair<CLI::App*, const Sub*>> commands;
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, o);
        commands.emplace_back(cmd, &s);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    for (const auto& [cmd, sub] : commands) {
        if (!cmd->parsed()) continue;
        try {
            return sub->fn(o, out, err);
        } catch (const Error& e) {
            err << json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << '\n';
            return 1;
        } catch (const std::exception& e) {
            err << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << '\n';
            return 1;
        }
    }
    return 2;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace lgnn::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgnn/csv.hpp"
#include "lgnn/dynamics.hpp"
#include "lgnn/gnn.hpp"
#include "lgnn/graph.hpp"
#include "lgnn/init.hpp"
#include "lgnn/shift.hpp"

namespace lgnn {

// ---------------------------------------------------------------------------
// Data generation and loading

/// d_x x n standard normal entries, filled row by row from Rng(seed).
Eigen::MatrixXd gaussian_features(int d_x, int n, std::uint64_t seed);

/// y_i = sum(x_i) + eps * sum_{j ~ i} sum(x_j); returns 1 x n.
Eigen::MatrixXd synthetic_labels(const Eigen::MatrixXd& x, const Graph& g, double eps);

/// n_bar distinct nodes drawn uniformly (partial Fisher-Yates), sorted ascending.
std::vector<int> sample_labeled_set(int n, int n_bar, std::uint64_t seed);

struct FeatureTable {
    Eigen::MatrixXd matrix;
    /// Rows with zero variance; left as all zeros after normalization.
    std::vector<int> constant_rows;
};

/// Numeric CSV, one feature per line and one column per node (in edge-CSV
/// node order). A non-numeric first line is skipped as a header. Each row is
/// z-scored with the population (1/n) variance.
FeatureTable load_features_csv(const std::filesystem::path& path, int n);
FeatureTable parse_features_csv(const std::string& text, int n);

/// Same layout without normalization (used for label matrices).
Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path, int n);
Eigen::MatrixXd parse_matrix_csv(const std::string& text, int n);

// ---------------------------------------------------------------------------
// Configuration

struct GraphSpec {
    std::string model = "er";  // er | knn | sbm | ba | csv
    int n = 200;
    double p = 0.1;
    double q = 0.05;
    int k = 4;
    int n1 = 100;
    int n2 = 100;
    int m = 2;
    std::optional<std::uint64_t> seed;  // defaults to master seed + 1
    std::string edges_csv;

    /// Overrides one numeric parameter by name ("p", "k", "m", ...).
    void set_param(const std::string& name, double value);
    double get_param(const std::string& name) const;
};

struct GraphSweep {
    std::string param;
    std::vector<double> values;
};

struct InitSpec {
    std::string scheme = "theorem";  // theorem | balanced
    /// "theorem" scheme: diagonal scale; nullopt selects min_admissible_a.
    std::optional<double> a;
    /// Balanced scheme: factorize target_scale * Y M^+.
    double target_scale = 0.5;
};

struct DynamicsSpec {
    std::string method = "flow";  // flow | normalized-flow | descent
    double t_max = 1e4;
    std::size_t k_max = 100'000;
    std::optional<double> eta;  // descent; nullopt = automatic
    DynamicsOptions options;
};

struct ExperimentConfig {
    GraphSpec graph;
    std::optional<GraphSweep> graph_sweep;
    std::vector<ShiftKind> shifts{ShiftKind::Adjacency};
    int d_x = 30;
    int depth = 2;
    std::vector<int> hidden;  // empty: H copies of max(32, d_y)
    double label_eps = 0.1;
    std::string features_csv;
    std::string labels_csv;
    double labeled_fraction = 0.75;
    std::vector<int> n_bar;  // explicit grid; empty uses labeled_fraction
    InitSpec init;
    DynamicsSpec dynamics;
    int replications = 1;
    std::uint64_t seed = 0;
    std::string output = "results";
    bool write_trajectories = false;
    double time_to_level = 1e-3;
    int jobs = 1;

    std::uint64_t graph_seed() const { return graph.seed ? *graph.seed : seed + 1; }
    std::uint64_t feature_seed() const { return seed; }
    /// Seed of the labeled set for replication `rep` of grid point `point`.
    std::uint64_t label_seed(std::size_t point, int rep) const {
        return seed + 2 + point * static_cast<std::uint64_t>(replications) + static_cast<std::uint64_t>(rep);
    }
    Dims dims(int d_y) const;
    std::vector<int> n_bar_grid(int n) const;
};

/// Parses the JSON document; throws ParameterError on unknown keys or values.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Building blocks shared by the sweeps and the CLI

Graph make_graph(const GraphSpec& spec, std::uint64_t seed);

/// Graph, shift-independent features and full label matrix (d_y x n).
struct Dataset {
    Graph graph;
    Eigen::MatrixXd features;
    Eigen::MatrixXd labels;
};

Dataset make_dataset(const ExperimentConfig& cfg, const GraphSpec& graph_spec);

Problem make_problem(const Dataset& data, ShiftKind kind, int depth, const std::vector<int>& labeled);

WeightStack make_init(const InitSpec& spec, const Dims& dims, const Problem& prob);

Trajectory run_dynamics(const DynamicsSpec& spec, const WeightStack& w0, const Problem& prob);

// ---------------------------------------------------------------------------
// Sweeps

struct SigmaRow {
    std::string model;
    std::string param;
    double param_value = 0.0;
    ShiftKind shift = ShiftKind::Adjacency;
    int n = 0;
    int d_x = 0;
    int depth = 0;
    int n_bar = 0;
    int replications = 0;
    double sigma_mean = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double predicted = 0.0;
    bool in_regime = false;
    std::string error;
};

std::vector<SigmaRow> sigma_sweep(const ExperimentConfig& cfg);
CsvTable sigma_table(const std::vector<SigmaRow>& rows);

struct ConvergenceRow {
    std::string model;
    std::string param;
    double param_value = 0.0;
    ShiftKind shift = ShiftKind::Adjacency;
    int n = 0;
    std::size_t edges = 0;
    int n_bar = 0;
    int replication = 0;
    std::string init;
    double a = 0.0;
    InitReport report;
    std::string method;
    double eta = 0.0;
    double final_rel_loss = 0.0;
    double final_t = 0.0;
    std::size_t steps = 0;
    RunStatus status = RunStatus::BudgetExhausted;
    std::optional<double> time_to_level;
    bool bound_ok = false;
    bool ball_ok = false;
    bool monotone = false;
    std::string error;
};

struct ConvergenceResult {
    ConvergenceRow row;
    std::optional<Trajectory> trajectory;
};

std::vector<ConvergenceResult> convergence_sweep(const ExperimentConfig& cfg);
CsvTable convergence_table(const std::vector<ConvergenceResult>& results);

/// t, loss, rel_loss, grad_norm_sq, balance_residual.
CsvTable trajectory_table(const Trajectory& traj);

/// Envelope check for flows: rel_loss(t) <= exp(-alpha t) (1 + slack) at every sample.
bool flow_bound_holds(const Trajectory& traj, double alpha_lower, double slack = 1e-6);
/// Contraction check for descent: rho_k <= 1 - eta alpha / 2 + slack for every k.
bool descent_bound_holds(const Trajectory& traj, double alpha_lower, double slack = 1e-9);
/// sum_l ||W_l(t) - W_l(0)||^2 <= r^2 at every sample.
bool safety_ball_holds(const Trajectory& traj, double r);

/// Runs f(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& f);

}  // namespace lgnn

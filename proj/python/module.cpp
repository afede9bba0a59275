#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lgnn/dynamics.hpp"
#include "lgnn/error.hpp"
#include "lgnn/experiments.hpp"
#include "lgnn/grad.hpp"
#include "lgnn/init.hpp"
#include "lgnn/linalg.hpp"
#include "lgnn/theory.hpp"
#include "lgnn/verify.hpp"

namespace py = pybind11;
using namespace lgnn;

namespace {

using Layers = std::vector<Eigen::MatrixXd>;

WeightStack stack(const Layers& layers) { return WeightStack(layers); }

Trajectory run(const Layers& w0, const Problem& prob, const std::string& method, double budget,
               std::optional<double> eta, const DynamicsOptions& opts) {
    const WeightStack w = stack(w0);
    if (method == "flow") return flow_integrate(w, prob, budget, opts);
    if (method == "normalized-flow") return normalized_flow_integrate(w, prob, budget, opts);
    if (method == "descent") return gradient_descent(w, prob, eta, static_cast<std::size_t>(budget), opts);
    throw ParameterError("method must be flow, normalized-flow or descent");
}

Eigen::VectorXd column(const Trajectory& t, double Sample::*field) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(t.samples.size()));
    for (std::size_t i = 0; i < t.samples.size(); ++i) v(static_cast<Eigen::Index>(i)) = t.samples[i].*field;
    return v;
}

}  // namespace

PYBIND11_MODULE(_lgnn, m) {
    m.doc() = "Linear GNNs and their gradient flow / gradient descent dynamics";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());

    // Graphs and shifts
    py::class_<Graph>(m, "Graph")
        .def(py::init([](int n, std::vector<Edge> edges) { return Graph(n, std::move(edges)); }), py::arg("n"),
             py::arg("edges"))
        .def_property_readonly("num_nodes", &Graph::num_nodes)
        .def_property_readonly("num_edges", &Graph::num_edges)
        .def_property_readonly("edges", &Graph::edges)
        .def("adjacency_matrix", &Graph::adjacency_matrix)
        .def("degrees", &Graph::degrees)
        .def("has_edge", &Graph::has_edge)
        .def("edge_csv", [](const Graph& g) { return edge_csv(g); })
        .def("__eq__", &Graph::operator==)
        .def("__repr__", [](const Graph& g) {
            return "Graph(n=" + std::to_string(g.num_nodes()) + ", edges=" + std::to_string(g.num_edges()) + ")";
        });
    m.def("erdos_renyi", &erdos_renyi, py::arg("n"), py::arg("p"), py::arg("seed"));
    m.def("knn_ring", &knn_ring, py::arg("n"), py::arg("k"));
    m.def("sbm", &sbm, py::arg("n1"), py::arg("n2"), py::arg("p"), py::arg("q"), py::arg("seed"));
    m.def("barabasi_albert", &barabasi_albert, py::arg("n"), py::arg("m"), py::arg("seed"));
    m.def(
        "parse_edge_csv",
        [](const std::string& text) {
            LoadedGraph g = parse_edge_csv(text);
            return py::make_tuple(g.graph, g.original_ids);
        },
        py::arg("text"), "Returns (graph, original_ids).");
    m.def(
        "load_edge_csv",
        [](const std::filesystem::path& path) {
            LoadedGraph g = load_edge_csv(path);
            return py::make_tuple(g.graph, g.original_ids);
        },
        py::arg("path"));
    m.def("shift_kinds", [] {
        std::vector<std::string> names;
        for (ShiftKind k : kAllShiftKinds) names.emplace_back(to_string(k));
        return names;
    });
    m.def(
        "build_shift", [](const Graph& g, const std::string& kind) { return build_shift(g, parse_shift_kind(kind)).matrix; },
        py::arg("graph"), py::arg("kind"));

    // Problem and loss
    py::class_<Problem>(m, "Problem")
        .def(py::init([](Eigen::MatrixXd x, Eigen::MatrixXd s, int depth, Eigen::MatrixXd y, std::vector<int> labeled,
                         const std::string& kind) {
                 return Problem(std::move(x), custom_shift(std::move(s), parse_shift_kind(kind)), depth, std::move(y),
                                std::move(labeled));
             }),
             py::arg("features"), py::arg("shift"), py::arg("depth"), py::arg("labels"), py::arg("labeled"),
             py::arg("kind") = "adj")
        .def_static(
            "from_graph",
            [](Eigen::MatrixXd x, const Graph& g, const std::string& kind, int depth, Eigen::MatrixXd y,
               std::vector<int> labeled) {
                return Problem(std::move(x), build_shift(g, parse_shift_kind(kind)), depth, std::move(y),
                               std::move(labeled));
            },
            py::arg("features"), py::arg("graph"), py::arg("kind"), py::arg("depth"), py::arg("labels"),
            py::arg("labeled"))
        .def_property_readonly("depth", &Problem::depth)
        .def_property_readonly("m", &Problem::m)
        .def_property_readonly("input_dim", &Problem::input_dim)
        .def_property_readonly("output_dim", &Problem::output_dim)
        .def_property_readonly("labeled", &Problem::labeled)
        .def_property_readonly("labels", &Problem::labels)
        .def_property_readonly("propagated", &Problem::propagated)
        .def_property_readonly("restricted", &Problem::restricted);

    m.def("forward", [](const Layers& w, const Problem& p) { return forward(stack(w), p); });
    m.def("collapsed_product", [](const Layers& w) { return collapsed_product(stack(w)); });
    m.def("loss", [](const Layers& w, const Problem& p) { return loss(stack(w), p); });
    m.def("excess_loss", [](const Layers& w, const Problem& p) { return excess_loss(stack(w), p); });
    m.def(
        "global_min_loss",
        [](const Problem& p, std::optional<Dims> dims) {
            const GlobalMinimum g = global_min_loss(p, dims);
            return py::make_tuple(g.value, g.exact);
        },
        py::arg("problem"), py::arg("dims") = py::none(), "Returns (value, exact).");
    m.def("min_norm_solution", &min_norm_solution);
    m.def("gradients", [](const Layers& w, const Problem& p) { return gradients(stack(w), p).layers; });
    m.def(
        "fd_gradient", [](const Layers& w, const Problem& p, double h) { return fd_gradient(stack(w), p, h).layers; },
        py::arg("weights"), py::arg("problem"), py::arg("h") = kDefaultFdStep);

    // Linear algebra
    m.def(
        "sigma_small",
        [](const Eigen::MatrixXd& a, double tol) {
            const SigmaSmall s = sigma_small(a, tol);
            return py::make_tuple(s.value, s.rank);
        },
        py::arg("matrix"), py::arg("rel_tol") = kDefaultRankTol, "Returns (value, rank).");
    m.def("pseudoinverse", &pseudoinverse, py::arg("matrix"), py::arg("rel_tol") = kDefaultRankTol);
    m.def("balancedness_residual", [](const Layers& w) { return balancedness_residual(stack(w)); });

    // Initialization
    m.def("theorem_init", [](const Dims& dims, double a) { return theorem_init(dims, a).layers(); }, py::arg("dims"),
          py::arg("a"));
    m.def(
        "balanced_init",
        [](const Dims& dims, const Eigen::MatrixXd& target, const Problem& p) {
            return balanced_init(dims, target, p).layers();
        },
        py::arg("dims"), py::arg("target"), py::arg("problem"));
    m.def("min_admissible_a", &min_admissible_a);
    m.def("init_beta", [](const Layers& w) { return init_beta(stack(w)); });

    py::class_<InitReport>(m, "InitReport")
        .def_readonly("beta", &InitReport::beta)
        .def_readonly("r", &InitReport::r)
        .def_readonly("sigma_small", &InitReport::sigma_small)
        .def_readonly("alpha_lower", &InitReport::alpha_lower)
        .def_readonly("loss0", &InitReport::loss0)
        .def_readonly("loss_min", &InitReport::loss_min)
        .def_readonly("condition_lhs", &InitReport::condition_lhs)
        .def_readonly("condition_rhs", &InitReport::condition_rhs)
        .def_readonly("valid", &InitReport::valid);
    m.def("validate_init", [](const Layers& w, const Problem& p) { return validate_init(stack(w), p); });

    // Dynamics
    py::class_<DynamicsOptions>(m, "DynamicsOptions")
        .def(py::init<>())
        .def_property(
            "scheme", [](const DynamicsOptions& o) { return std::string(to_string(o.scheme)); },
            [](DynamicsOptions& o, const std::string& s) { o.scheme = parse_flow_scheme(s); })
        .def_readwrite("h0", &DynamicsOptions::h0)
        .def_readwrite("h_max", &DynamicsOptions::h_max)
        .def_readwrite("h_min", &DynamicsOptions::h_min)
        .def_readwrite("tol", &DynamicsOptions::tol)
        .def_readwrite("armijo_c", &DynamicsOptions::armijo_c)
        .def_readwrite("growth", &DynamicsOptions::growth)
        .def_readwrite("max_steps", &DynamicsOptions::max_steps)
        .def_readwrite("max_samples", &DynamicsOptions::max_samples)
        .def_readwrite("eta0", &DynamicsOptions::eta0);

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("t", [](const Trajectory& t) { return column(t, &Sample::t); })
        .def_property_readonly("loss", [](const Trajectory& t) { return column(t, &Sample::loss); })
        .def_property_readonly("rel_loss", [](const Trajectory& t) { return column(t, &Sample::rel_loss); })
        .def_property_readonly("grad_norm_sq", [](const Trajectory& t) { return column(t, &Sample::grad_norm_sq); })
        .def_property_readonly("balance_residual",
                               [](const Trajectory& t) { return column(t, &Sample::balance_residual); })
        .def_property_readonly("drift_sq", [](const Trajectory& t) { return column(t, &Sample::drift_sq); })
        .def_property_readonly("final_weights", [](const Trajectory& t) { return t.final_weights.layers(); })
        .def_property_readonly("status", [](const Trajectory& t) { return std::string(to_string(t.status)); })
        .def_readonly("monotone", &Trajectory::monotone)
        .def_readonly("loss0", &Trajectory::loss0)
        .def_readonly("loss_min", &Trajectory::loss_min)
        .def_readonly("accepted_steps", &Trajectory::accepted_steps)
        .def_readonly("rejected_steps", &Trajectory::rejected_steps)
        .def_readonly("eta", &Trajectory::eta)
        .def_readonly("contraction", &Trajectory::contraction)
        .def("time_to", &Trajectory::time_to);

    m.def("run_dynamics", &run, py::arg("weights"), py::arg("problem"), py::arg("method") = "flow",
          py::arg("budget") = 1e4, py::arg("eta") = py::none(), py::arg("options") = DynamicsOptions{},
          "budget is T_max for flows and k_max for descent.");
    m.def(
        "iterations_to_epsilon",
        [](const InitReport& r, double eta, double loss0, double loss_min, double eps) {
            return iterations_to_epsilon(r, eta, loss0, loss_min, eps);
        },
        py::arg("report"), py::arg("eta"), py::arg("loss0"), py::arg("loss_min"), py::arg("eps"));

    // Theory
    m.def("rate_bundle", [](const Layers& w, const Problem& p) {
        const RateBundle b = rate_bundle(stack(w), p);
        py::dict d;
        d["sigma_small_restricted"] = b.sigma_small_restricted;
        d["beta"] = b.beta;
        d["m"] = b.m;
        d["alpha_lower"] = b.alpha_lower;
        return d;
    });
    m.def("energy_min_value", py::overload_cast<const Problem&>(&energy_min_value));
    m.def("balanced_energy", &balanced_energy, py::arg("product"), py::arg("depth"));
    m.def(
        "expected_sigma_small",
        [](const Eigen::MatrixXd& propagated, int n_bar) {
            const SigmaPrediction s = expected_sigma_small(propagated, n_bar);
            return py::make_tuple(s.value, s.in_regime);
        },
        py::arg("propagated"), py::arg("n_bar"), "Returns (value, in_regime).");

    // Data and sweeps
    m.def("gaussian_features", &gaussian_features, py::arg("d_x"), py::arg("n"), py::arg("seed"));
    m.def("synthetic_labels", &synthetic_labels, py::arg("features"), py::arg("graph"), py::arg("eps"));
    m.def("sample_labeled_set", &sample_labeled_set, py::arg("n"), py::arg("n_bar"), py::arg("seed"));
    m.def(
        "sigma_sweep_csv", [](const std::string& config) { return sigma_table(sigma_sweep(parse_config(config))).str(); },
        py::arg("config_json"));
    m.def(
        "convergence_sweep_csv",
        [](const std::string& config) { return convergence_table(convergence_sweep(parse_config(config))).str(); },
        py::arg("config_json"));
    m.def("verify_suite", [](std::uint64_t seed) {
        std::vector<py::tuple> out;
        for (const auto& r : run_verify_suite(seed)) out.push_back(py::make_tuple(r.name, r.passed, r.detail));
        return out;
    }, py::arg("seed") = 0);
}

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lgnn/error.hpp"
#include "lgnn/experiments.hpp"

namespace lgnn {

namespace {

using nlohmann::json;

void require_known(const json& obj, const std::string& where, const std::set<std::string>& keys) {
    if (!obj.is_object()) throw ParameterError(where + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (!keys.count(key)) throw ParameterError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ParameterError(where + "." + key + " has the wrong type");
    }
}

// Accepts a number or the string "auto" (stored as nullopt).
void read_auto(const json& obj, const char* key, std::optional<double>& out, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (it->is_string() && it->get<std::string>() == "auto") {
        out.reset();
    } else if (it->is_number()) {
        out = it->get<double>();
    } else {
        throw ParameterError(where + "." + key + " must be a number or \"auto\"");
    }
}

GraphSpec parse_graph(const json& j) {
    require_known(j, "graph", {"model", "n", "p", "q", "k", "n1", "n2", "m", "seed", "edges_csv"});
    GraphSpec g;
    read(j, "model", g.model, "graph");
    read(j, "n", g.n, "graph");
    read(j, "p", g.p, "graph");
    read(j, "q", g.q, "graph");
    read(j, "k", g.k, "graph");
    read(j, "n1", g.n1, "graph");
    read(j, "n2", g.n2, "graph");
    read(j, "m", g.m, "graph");
    read(j, "edges_csv", g.edges_csv, "graph");
    if (j.contains("seed") && !j["seed"].is_null()) {
        std::uint64_t s = 0;
        read(j, "seed", s, "graph");
        g.seed = s;
    }
    if (g.model != "er" && g.model != "knn" && g.model != "sbm" && g.model != "ba" && g.model != "csv") {
        throw ParameterError("graph.model must be one of er, knn, sbm, ba, csv");
    }
    return g;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    require_known(j, "config",
                  {"graph", "graph_sweep", "shifts", "d_x", "depth", "hidden", "label_eps", "features_csv",
                   "labels_csv", "labeled_fraction", "n_bar", "init", "dynamics", "replications", "seed", "output",
                   "write_trajectories", "time_to_level", "jobs"});
    ExperimentConfig cfg;
    if (j.contains("graph")) cfg.graph = parse_graph(j["graph"]);
    if (j.contains("graph_sweep")) {
        const json& s = j["graph_sweep"];
        require_known(s, "graph_sweep", {"param", "values"});
        GraphSweep sweep;
        read(s, "param", sweep.param, "graph_sweep");
        read(s, "values", sweep.values, "graph_sweep");
        cfg.graph.get_param(sweep.param);
        cfg.graph_sweep = std::move(sweep);
    }
    if (j.contains("shifts")) {
        std::vector<std::string> names;
        read(j, "shifts", names, "config");
        if (names.empty()) throw ParameterError("shifts must not be empty");
        cfg.shifts.clear();
        for (const auto& name : names) cfg.shifts.push_back(parse_shift_kind(name));
    }
    read(j, "d_x", cfg.d_x, "config");
    read(j, "depth", cfg.depth, "config");
    read(j, "hidden", cfg.hidden, "config");
    read(j, "label_eps", cfg.label_eps, "config");
    read(j, "features_csv", cfg.features_csv, "config");
    read(j, "labels_csv", cfg.labels_csv, "config");
    read(j, "labeled_fraction", cfg.labeled_fraction, "config");
    read(j, "n_bar", cfg.n_bar, "config");
    if (j.contains("init")) {
        const json& s = j["init"];
        require_known(s, "init", {"scheme", "a", "target_scale"});
        read(s, "scheme", cfg.init.scheme, "init");
        read_auto(s, "a", cfg.init.a, "init");
        read(s, "target_scale", cfg.init.target_scale, "init");
        if (cfg.init.scheme != "theorem" && cfg.init.scheme != "balanced") {
            throw ParameterError("init.scheme must be theorem or balanced");
        }
    }
    if (j.contains("dynamics")) {
        const json& s = j["dynamics"];
        require_known(s, "dynamics",
                      {"method", "scheme", "t_max", "k_max", "eta", "tol", "h0", "h_max", "h_min", "armijo_c", "growth",
                       "max_steps", "max_samples", "thinning", "eta0"});
        DynamicsSpec& d = cfg.dynamics;
        read(s, "method", d.method, "dynamics");
        if (s.contains("scheme")) {
            if (!s["scheme"].is_string()) throw ParameterError("dynamics.scheme has the wrong type");
            d.options.scheme = parse_flow_scheme(s["scheme"].get<std::string>());
        }
        read(s, "t_max", d.t_max, "dynamics");
        read(s, "k_max", d.k_max, "dynamics");
        read_auto(s, "eta", d.eta, "dynamics");
        read(s, "tol", d.options.tol, "dynamics");
        read(s, "h0", d.options.h0, "dynamics");
        read(s, "h_max", d.options.h_max, "dynamics");
        read(s, "h_min", d.options.h_min, "dynamics");
        read(s, "armijo_c", d.options.armijo_c, "dynamics");
        read(s, "growth", d.options.growth, "dynamics");
        read(s, "max_steps", d.options.max_steps, "dynamics");
        read(s, "max_samples", d.options.max_samples, "dynamics");
        read(s, "thinning", d.options.thinning, "dynamics");
        read(s, "eta0", d.options.eta0, "dynamics");
        if (d.method != "flow" && d.method != "normalized-flow" && d.method != "descent") {
            throw ParameterError("dynamics.method must be flow, normalized-flow or descent");
        }
    }
    read(j, "replications", cfg.replications, "config");
    read(j, "seed", cfg.seed, "config");
    read(j, "output", cfg.output, "config");
    read(j, "write_trajectories", cfg.write_trajectories, "config");
    read(j, "time_to_level", cfg.time_to_level, "config");
    read(j, "jobs", cfg.jobs, "config");
    if (cfg.replications < 1) throw ParameterError("replications must be at least 1");
    if (cfg.d_x < 1) throw ParameterError("d_x must be positive");
    if (cfg.depth < 1) throw ParameterError("depth must be at least 1");
    if (cfg.jobs < 1) throw ParameterError("jobs must be at least 1");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json g{{"model", cfg.graph.model}, {"n", cfg.graph.n},   {"p", cfg.graph.p},   {"q", cfg.graph.q},
           {"k", cfg.graph.k},         {"n1", cfg.graph.n1}, {"n2", cfg.graph.n2}, {"m", cfg.graph.m},
           {"edges_csv", cfg.graph.edges_csv}};
    g["seed"] = cfg.graph.seed ? json(*cfg.graph.seed) : json(nullptr);
    std::vector<std::string> shifts;
    for (ShiftKind k : cfg.shifts) shifts.emplace_back(to_string(k));
    const auto& d = cfg.dynamics;
    json j{{"graph", g},
           {"shifts", shifts},
           {"d_x", cfg.d_x},
           {"depth", cfg.depth},
           {"hidden", cfg.hidden},
           {"label_eps", cfg.label_eps},
           {"features_csv", cfg.features_csv},
           {"labels_csv", cfg.labels_csv},
           {"labeled_fraction", cfg.labeled_fraction},
           {"n_bar", cfg.n_bar},
           {"init",
            {{"scheme", cfg.init.scheme},
             {"a", cfg.init.a ? json(*cfg.init.a) : json("auto")},
             {"target_scale", cfg.init.target_scale}}},
           {"dynamics",
            {{"method", d.method},
             {"scheme", std::string(to_string(d.options.scheme))},
             {"t_max", d.t_max},
             {"k_max", d.k_max},
             {"eta", d.eta ? json(*d.eta) : json("auto")},
             {"tol", d.options.tol},
             {"h0", d.options.h0},
             {"h_max", d.options.h_max},
             {"h_min", d.options.h_min},
             {"armijo_c", d.options.armijo_c},
             {"growth", d.options.growth},
             {"max_steps", d.options.max_steps},
             {"max_samples", d.options.max_samples},
             {"thinning", d.options.thinning},
             {"eta0", d.options.eta0}}},
           {"replications", cfg.replications},
           {"seed", cfg.seed},
           {"output", cfg.output},
           {"write_trajectories", cfg.write_trajectories},
           {"time_to_level", cfg.time_to_level},
           {"jobs", cfg.jobs}};
    if (cfg.graph_sweep) j["graph_sweep"] = {{"param", cfg.graph_sweep->param}, {"values", cfg.graph_sweep->values}};
    return j.dump(2) + "\n";
}

}  // namespace lgnn

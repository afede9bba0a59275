#include "lgnn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "lgnn/error.hpp"
#include "lgnn/rng.hpp"

namespace lgnn {

namespace {

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ParameterError(std::string(name) + " must lie in [0,1], got " + std::to_string(p));
    }
}

}  // namespace

Graph::Graph(int n, std::vector<Edge> edges, GraphMeta meta) : n_(n), edges_(std::move(edges)), meta_(std::move(meta)) {
    if (n_ < 1) throw ParameterError("graph needs at least one node");
    for (auto& [u, v] : edges_) {
        if (u < 0 || v < 0 || u >= n_ || v >= n_) {
            throw ParameterError("edge endpoint out of range: {" + std::to_string(u) + "," + std::to_string(v) + "}");
        }
        if (u == v) throw ParameterError("self-loop at node " + std::to_string(u));
        if (u > v) std::swap(u, v);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
        throw ParameterError("duplicate edge");
    }
}

Eigen::MatrixXd Graph::adjacency_matrix() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& [u, v] : edges_) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    return a;
}

std::vector<int> Graph::degrees() const {
    std::vector<int> deg(n_, 0);
    for (const auto& [u, v] : edges_) {
        ++deg[u];
        ++deg[v];
    }
    return deg;
}

std::vector<std::vector<int>> Graph::neighbors() const {
    std::vector<std::vector<int>> adj(n_);
    for (const auto& [u, v] : edges_) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
}

bool Graph::has_edge(int u, int v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v});
}

Graph erdos_renyi(int n, double p, std::uint64_t seed) {
    if (n < 1) throw ParameterError("erdos_renyi: n must be positive");
    check_probability(p, "erdos_renyi: p");
    Rng rng(seed);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.bernoulli(p)) edges.emplace_back(i, j);
        }
    }
    return Graph(n, std::move(edges), GraphMeta{"er", {{"n", n}, {"p", p}}, seed});
}

Graph knn_ring(int n, int k) {
    if (n < 1) throw ParameterError("knn_ring: n must be positive");
    if (k <= 0 || k % 2 != 0) throw ParameterError("knn_ring: k must be even and positive, got " + std::to_string(k));
    if (k >= n) throw ParameterError("knn_ring: k must be smaller than n");
    std::set<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int s = 1; s <= k / 2; ++s) {
            const int j = (i + s) % n;
            edges.emplace(std::min(i, j), std::max(i, j));
        }
    }
    return Graph(n, {edges.begin(), edges.end()}, GraphMeta{"knn", {{"n", n}, {"k", k}}, 0});
}

Graph sbm(int n1, int n2, double p, double q, std::uint64_t seed) {
    if (n1 < 1 || n2 < 1) throw ParameterError("sbm: block sizes must be positive");
    check_probability(p, "sbm: p");
    check_probability(q, "sbm: q");
    const int n = n1 + n2;
    Rng rng(seed);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool same_block = (i < n1) == (j < n1);
            if (rng.bernoulli(same_block ? p : q)) edges.emplace_back(i, j);
        }
    }
    return Graph(n, std::move(edges), GraphMeta{"sbm", {{"n1", n1}, {"n2", n2}, {"p", p}, {"q", q}}, seed});
}

Graph barabasi_albert(int n, int m, std::uint64_t seed) {
    if (m < 1) throw ParameterError("barabasi_albert: m must be positive");
    if (m >= n) throw ParameterError("barabasi_albert: m must be smaller than n");
    Rng rng(seed);
    std::vector<Edge> edges;
    std::vector<long long> degree(n, 0);
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            edges.emplace_back(i, j);
            ++degree[i];
            ++degree[j];
        }
    }
    std::vector<long long> weight;
    std::vector<int> targets;
    for (int v = m; v < n; ++v) {
        weight.assign(degree.begin(), degree.begin() + v);
        targets.clear();
        for (int pick = 0; pick < m; ++pick) {
            long long total = 0;
            for (long long w : weight) total += w;
            int chosen = -1;
            if (total == 0) {
                // Only reachable while the core is a single isolated node.
                std::vector<int> open;
                for (int u = 0; u < v; ++u) {
                    if (std::find(targets.begin(), targets.end(), u) == targets.end()) open.push_back(u);
                }
                chosen = open[rng.below(open.size())];
            } else {
                long long r = static_cast<long long>(rng.below(static_cast<std::uint64_t>(total)));
                for (int u = 0; u < v; ++u) {
                    if (r < weight[u]) {
                        chosen = u;
                        break;
                    }
                    r -= weight[u];
                }
            }
            targets.push_back(chosen);
            weight[chosen] = 0;
        }
        for (int u : targets) {
            edges.emplace_back(u, v);
            ++degree[u];
            ++degree[v];
        }
    }
    return Graph(n, std::move(edges), GraphMeta{"ba", {{"n", n}, {"m", m}}, seed});
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_ll(std::string_view s, long long& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

LoadedGraph parse_edge_csv(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::unordered_map<long long, int> index;
    std::vector<long long> original;
    std::set<Edge> edges;
    std::size_t duplicates = 0, self_loops = 0, line_no = 0;
    bool first_content = true;

    auto intern = [&](long long id) {
        auto [it, inserted] = index.emplace(id, static_cast<int>(original.size()));
        if (inserted) original.push_back(id);
        return it->second;
    };

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        long long u = 0, v = 0;
        const bool ok = comma != std::string_view::npos && line.find(',', comma + 1) == std::string_view::npos &&
                        parse_ll(line.substr(0, comma), u) && parse_ll(line.substr(comma + 1), v);
        if (!ok) {
            if (first_content) {
                first_content = false;
                continue;  // header
            }
            throw ParseError("edge csv line " + std::to_string(line_no) + ": expected \"u,v\" with integer ids, got \"" +
                             std::string(line) + "\"");
        }
        first_content = false;
        const int a = intern(u);
        const int b = intern(v);
        if (a == b) {
            ++self_loops;
            continue;
        }
        if (!edges.emplace(std::min(a, b), std::max(a, b)).second) ++duplicates;
    }
    if (original.empty()) throw ParseError("edge csv contains no edges");
    LoadedGraph out{Graph(static_cast<int>(original.size()), {edges.begin(), edges.end()}), std::move(original), duplicates,
                    self_loops};
    return out;
}

LoadedGraph load_edge_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open edge csv: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_edge_csv(buf.str());
}

std::string edge_csv(const Graph& g) {
    std::string out = "u,v\n";
    for (const auto& [u, v] : g.edges()) {
        out += std::to_string(u);
        out += ',';
        out += std::to_string(v);
        out += '\n';
    }
    return out;
}

void write_edge_csv(const Graph& g, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write " + path.string());
    out << edge_csv(g);
}

}  // namespace lgnn

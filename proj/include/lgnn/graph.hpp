#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace lgnn {

using Edge = std::pair<int, int>;

/// Generator tag and parameters; empty model for loaded or hand-built graphs.
struct GraphMeta {
    std::string model;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
};

/// Undirected simple graph on dense node ids 0..n-1.
///
/// Edges are stored normalized (first < second) and sorted, so two graphs
/// with the same edge set compare equal regardless of insertion order.
/// Immutable after construction.
class Graph {
public:
    /// Throws ParameterError on self-loops, duplicates or out-of-range endpoints.
    Graph(int n, std::vector<Edge> edges, GraphMeta meta = {});

    int num_nodes() const { return n_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const GraphMeta& meta() const { return meta_; }

    Eigen::MatrixXd adjacency_matrix() const;
    std::vector<int> degrees() const;
    std::vector<std::vector<int>> neighbors() const;
    bool has_edge(int u, int v) const;

    bool operator==(const Graph& other) const { return n_ == other.n_ && edges_ == other.edges_; }

private:
    int n_;
    std::vector<Edge> edges_;
    GraphMeta meta_;
};

Graph erdos_renyi(int n, double p, std::uint64_t seed);

/// Ring lattice: node i joined to i +- 1, ..., i +- k/2 (mod n).
Graph knn_ring(int n, int k);

/// Two-block stochastic block model; nodes [0, n1) form the first block.
Graph sbm(int n1, int n2, double p, double q, std::uint64_t seed);

/// Preferential attachment grown from a complete core on m nodes. Each new
/// node draws m distinct existing targets, one at a time, with probability
/// proportional to current degree among the not-yet-chosen nodes.
Graph barabasi_albert(int n, int m, std::uint64_t seed);

struct LoadedGraph {
    Graph graph;
    /// original_ids[i] is the id that node i carried in the file.
    std::vector<long long> original_ids;
    std::size_t duplicates_dropped = 0;
    std::size_t self_loops_dropped = 0;
};

/// Reads "u,v" lines. A non-numeric first line is treated as a header.
/// Ids are compacted in first-appearance order; self-loop endpoints still
/// count as nodes.
LoadedGraph load_edge_csv(const std::filesystem::path& path);
LoadedGraph parse_edge_csv(const std::string& text);

/// Writes "u,v" header followed by one edge per line.
void write_edge_csv(const Graph& g, const std::filesystem::path& path);
std::string edge_csv(const Graph& g);

}  // namespace lgnn

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace specloc {

/// One undirected weighted edge; canonical orientation is u < v.
struct Edge {
    int u = 0;
    int v = 0;
    double w = 1.0;
};

/// Immutable undirected weighted graph on contiguous node ids 0..n-1.
/// Invariants enforced at construction: no self-loops, each unordered
/// pair stored once (duplicates merged by weight sum), weights strictly
/// positive and finite, indices in range. Safe to share across threads.
class Graph {
public:
    Graph() = default;

    /// Validate, merge duplicate pairs by summing weights, and build
    /// adjacency structure. Throws ValidationError on bad input.
    static Graph from_edges(int n_nodes, std::vector<Edge> edges);

    int n_nodes() const { return n_; }
    int n_edges() const { return static_cast<int>(edges_.size()); }

    /// Edges sorted by (u, v) with u < v, one entry per unordered pair.
    const std::vector<Edge>& edges() const { return edges_; }

    /// Neighbor ids of each node, ascending.
    const std::vector<std::vector<int>>& neighbors() const { return adj_; }

    /// Weighted degree k_i = sum of incident edge weights.
    const Eigen::VectorXd& degrees() const { return degree_; }

    bool has_edge(int u, int v) const;
    bool is_connected() const;

    /// Dense symmetric adjacency matrix.
    Eigen::MatrixXd adjacency() const;

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;
    Eigen::VectorXd degree_;
};

/// Per-node weighted degrees with the spread statistics used as the
/// spatial disorder measure: fluctuation = sqrt(sum_i (k_i - <k>)^2) / N.
/// stddev is the plain standard deviation, kept for comparability
/// (fluctuation * sqrt(N) == stddev).
struct DegreeStats {
    Eigen::VectorXd degrees;
    double mean_degree = 0.0;
    double fluctuation = 0.0;
    double stddev = 0.0;
};

enum class GraphKind {
    ring,
    path,
    complete,
    star,
    grid2d,
    erdos_renyi,
    barabasi_albert,
};

enum class EdgeListFormat { whitespace, csv };

/// Parameters for generate(); fields are interpreted per kind.
struct GeneratorParams {
    int n = 0;          ///< node count (side length for grid2d when rows/cols unset)
    int rows = 0;       ///< grid2d rows; 0 means use n
    int cols = 0;       ///< grid2d cols; 0 means use n
    double p = 0.0;     ///< erdos_renyi edge probability, in (0, 1]
    int m_attach = 0;   ///< barabasi_albert edges per new node
    bool require_connected = true;  ///< resample random kinds until connected
    int max_retries = 64;
};

GraphKind graph_kind_from_string(const std::string& name);
std::string to_string(GraphKind kind);

/// Parse an edge-list file: one "u v" or "u v w" per line, '#' comments,
/// fields split on whitespace or commas per format. Duplicate pairs merge
/// by weight sum; missing weight defaults to 1.0; n = 1 + max index.
Graph load_edge_list(const std::filesystem::path& path, EdgeListFormat format);

/// Inverse of load_edge_list: one "u v w" line per stored edge.
void write_edge_list(const Graph& g, const std::filesystem::path& path);

/// Deterministic graph construction; random kinds are pure functions of
/// (kind, params, seed) and are resampled until connected when requested.
Graph generate(GraphKind kind, const GeneratorParams& params, std::uint64_t seed = 0);

DegreeStats degree_stats(const Graph& g);

/// The disorder order parameter: sqrt(sum_i (k_i - <k>)^2) / N. Zero iff
/// all weighted degrees are equal.
double degree_fluctuation(const Graph& g);

/// I - D^{-1/2} A D^{-1/2}. Requires every node degree > 0; throws
/// ValidationError naming the first isolated node otherwise. Exactly
/// symmetric by construction, eigenvalues in [0, 2].
Eigen::MatrixXd normalized_laplacian(const Graph& g);

/// Unnormalized Laplacian D - A.
Eigen::MatrixXd laplacian(const Graph& g);

} // namespace specloc

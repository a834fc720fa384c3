#include "specloc/graph.hpp"

#include "specloc/errors.hpp"
#include "specloc/rng.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

namespace specloc {

Graph Graph::from_edges(int n_nodes, std::vector<Edge> edges) {
    if (n_nodes < 1) throw ValidationError("graph must have at least one node");
    std::map<std::pair<int, int>, double> merged;
    for (const Edge& e : edges) {
        if (e.u < 0 || e.u >= n_nodes || e.v < 0 || e.v >= n_nodes)
            throw ValidationError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                  ") out of range for n=" + std::to_string(n_nodes));
        if (e.u == e.v)
            throw ValidationError("self-loop at node " + std::to_string(e.u));
        if (!std::isfinite(e.w) || e.w <= 0.0)
            throw ValidationError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                  ") has non-positive or non-finite weight");
        auto key = std::minmax(e.u, e.v);
        merged[key] += e.w;
    }
    Graph g;
    g.n_ = n_nodes;
    g.edges_.reserve(merged.size());
    g.adj_.assign(n_nodes, {});
    g.degree_ = Eigen::VectorXd::Zero(n_nodes);
    for (const auto& [key, w] : merged) {
        g.edges_.push_back({key.first, key.second, w});
        g.adj_[key.first].push_back(key.second);
        g.adj_[key.second].push_back(key.first);
        g.degree_[key.first] += w;
        g.degree_[key.second] += w;
    }
    for (auto& nbrs : g.adj_) std::sort(nbrs.begin(), nbrs.end());
    return g;
}

bool Graph::has_edge(int u, int v) const {
    if (u < 0 || u >= n_ || v < 0 || v >= n_) return false;
    const auto& nbrs = adj_[u];
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

bool Graph::is_connected() const {
    if (n_ <= 1) return true;
    std::vector<char> seen(n_, 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        int u = frontier.front();
        frontier.pop();
        for (int v : adj_[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                frontier.push(v);
            }
        }
    }
    return reached == n_;
}

Eigen::MatrixXd Graph::adjacency() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    for (const Edge& e : edges_) {
        a(e.u, e.v) = e.w;
        a(e.v, e.u) = e.w;
    }
    return a;
}

GraphKind graph_kind_from_string(const std::string& name) {
    if (name == "ring") return GraphKind::ring;
    if (name == "path") return GraphKind::path;
    if (name == "complete") return GraphKind::complete;
    if (name == "star") return GraphKind::star;
    if (name == "grid2d") return GraphKind::grid2d;
    if (name == "erdos-renyi" || name == "erdos_renyi") return GraphKind::erdos_renyi;
    if (name == "barabasi-albert" || name == "barabasi_albert") return GraphKind::barabasi_albert;
    throw ValidationError("unknown graph kind '" + name + "'");
}

std::string to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::ring: return "ring";
        case GraphKind::path: return "path";
        case GraphKind::complete: return "complete";
        case GraphKind::star: return "star";
        case GraphKind::grid2d: return "grid2d";
        case GraphKind::erdos_renyi: return "erdos_renyi";
        case GraphKind::barabasi_albert: return "barabasi_albert";
    }
    return "unknown";
}

namespace {

std::vector<std::string> split_fields(const std::string& line, EdgeListFormat format) {
    std::vector<std::string> fields;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            fields.push_back(current);
            current.clear();
        }
    };
    for (char c : line) {
        const bool sep = (format == EdgeListFormat::csv)
                             ? (c == ',')
                             : (c == ' ' || c == '\t');
        if (sep) {
            flush();
            // csv still tolerates padding spaces around fields
        } else if (format == EdgeListFormat::csv && (c == ' ' || c == '\t')) {
            continue;
        } else {
            current.push_back(c);
        }
    }
    flush();
    return fields;
}

int parse_index(const std::string& s, const std::string& context) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(context + ": expected integer node index, got '" + s + "'");
    return value;
}

double parse_weight(const std::string& s, const std::string& context) {
    try {
        std::size_t used = 0;
        double value = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return value;
    } catch (const std::exception&) {
        throw ParseError(context + ": expected real edge weight, got '" + s + "'");
    }
}

} // namespace

Graph load_edge_list(const std::filesystem::path& path, EdgeListFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open edge list '" + path.string() + "'");

    std::vector<Edge> edges;
    int max_index = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;

        const std::string context = path.string() + ":" + std::to_string(line_no);
        auto fields = split_fields(line, format);
        if (fields.size() < 2 || fields.size() > 3)
            throw ParseError(context + ": expected 'u v [w]', got " +
                             std::to_string(fields.size()) + " fields");
        int u = parse_index(fields[0], context);
        int v = parse_index(fields[1], context);
        if (u < 0 || v < 0)
            throw ValidationError(context + ": negative node index");
        if (u == v)
            throw ValidationError(context + ": self-loop at node " + std::to_string(u));
        double w = fields.size() == 3 ? parse_weight(fields[2], context) : 1.0;
        if (!std::isfinite(w) || w <= 0.0)
            throw ValidationError(context + ": weight must be positive and finite");
        edges.push_back({u, v, w});
        max_index = std::max({max_index, u, v});
    }
    if (max_index < 0) throw ValidationError("edge list '" + path.string() + "' has no edges");
    return Graph::from_edges(max_index + 1, std::move(edges));
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write edge list '" + path.string() + "'");
    char buf[64];
    for (const Edge& e : g.edges()) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.w);
        out << e.u << ' ' << e.v << ' ' << buf << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

namespace {

Graph make_ring(int n) {
    if (n < 3) throw ValidationError("ring requires n >= 3");
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
    return Graph::from_edges(n, std::move(edges));
}

Graph make_path(int n) {
    if (n < 2) throw ValidationError("path requires n >= 2");
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
    return Graph::from_edges(n, std::move(edges));
}

Graph make_complete(int n) {
    if (n < 2) throw ValidationError("complete requires n >= 2");
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
    return Graph::from_edges(n, std::move(edges));
}

Graph make_star(int n) {
    if (n < 2) throw ValidationError("star requires n >= 2");
    std::vector<Edge> edges;
    for (int i = 1; i < n; ++i) edges.push_back({0, i, 1.0});
    return Graph::from_edges(n, std::move(edges));
}

Graph make_grid2d(const GeneratorParams& params) {
    int rows = params.rows > 0 ? params.rows : params.n;
    int cols = params.cols > 0 ? params.cols : params.n;
    if (rows < 1 || cols < 1 || rows * cols < 2)
        throw ValidationError("grid2d requires at least 1x2 sites");
    auto id = [cols](int r, int c) { return r * cols + c; };
    std::vector<Edge> edges;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1), 1.0});
            if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c), 1.0});
        }
    return Graph::from_edges(rows * cols, std::move(edges));
}

Graph sample_erdos_renyi(int n, double p, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (unit(gen) < p) edges.push_back({i, j, 1.0});
    return Graph::from_edges(n, std::move(edges));
}

Graph make_erdos_renyi(const GeneratorParams& params, std::uint64_t seed) {
    if (params.n < 2) throw ValidationError("erdos_renyi requires n >= 2");
    if (!(params.p > 0.0 && params.p <= 1.0))
        throw ValidationError("erdos_renyi requires p in (0, 1]");
    const int retries = std::max(1, params.max_retries);
    for (int attempt = 0; attempt < retries; ++attempt) {
        auto gen = rng::engine(seed, rng::tag("erdos_renyi"), attempt);
        Graph g = sample_erdos_renyi(params.n, params.p, gen);
        if (!params.require_connected || g.is_connected()) return g;
    }
    throw GenerationError("no connected erdos_renyi(n=" + std::to_string(params.n) +
                          ", p=" + std::to_string(params.p) + ") sample within " +
                          std::to_string(retries) + " retries");
}

Graph make_barabasi_albert(const GeneratorParams& params, std::uint64_t seed) {
    const int n = params.n;
    const int m = params.m_attach;
    if (m < 1) throw ValidationError("barabasi_albert requires m_attach >= 1");
    if (n < m + 2)
        throw ValidationError("barabasi_albert requires n >= m_attach + 2");
    auto gen = rng::engine(seed, rng::tag("barabasi_albert"));

    // Seed clique on m+1 nodes, then preferential attachment by sampling
    // the incidence multiset (each edge contributes both endpoints).
    std::vector<Edge> edges;
    std::vector<int> incidence;
    for (int i = 0; i <= m; ++i)
        for (int j = i + 1; j <= m; ++j) {
            edges.push_back({i, j, 1.0});
            incidence.push_back(i);
            incidence.push_back(j);
        }
    for (int v = m + 1; v < n; ++v) {
        std::vector<int> targets;
        while (static_cast<int>(targets.size()) < m) {
            std::uniform_int_distribution<std::size_t> pick(0, incidence.size() - 1);
            int candidate = incidence[pick(gen)];
            if (std::find(targets.begin(), targets.end(), candidate) == targets.end())
                targets.push_back(candidate);
        }
        for (int t : targets) {
            edges.push_back({t, v, 1.0});
            incidence.push_back(t);
            incidence.push_back(v);
        }
    }
    return Graph::from_edges(n, std::move(edges));
}

} // namespace

Graph generate(GraphKind kind, const GeneratorParams& params, std::uint64_t seed) {
    switch (kind) {
        case GraphKind::ring: return make_ring(params.n);
        case GraphKind::path: return make_path(params.n);
        case GraphKind::complete: return make_complete(params.n);
        case GraphKind::star: return make_star(params.n);
        case GraphKind::grid2d: return make_grid2d(params);
        case GraphKind::erdos_renyi: return make_erdos_renyi(params, seed);
        case GraphKind::barabasi_albert: return make_barabasi_albert(params, seed);
    }
    throw ValidationError("unknown graph kind");
}

DegreeStats degree_stats(const Graph& g) {
    if (g.n_nodes() < 1) throw ValidationError("degree stats of empty graph");
    DegreeStats stats;
    stats.degrees = g.degrees();
    const double n = static_cast<double>(g.n_nodes());
    stats.mean_degree = stats.degrees.sum() / n;
    const double ss = (stats.degrees.array() - stats.mean_degree).square().sum();
    stats.fluctuation = std::sqrt(ss) / n;
    stats.stddev = std::sqrt(ss / n);
    return stats;
}

double degree_fluctuation(const Graph& g) {
    return degree_stats(g).fluctuation;
}

Eigen::MatrixXd normalized_laplacian(const Graph& g) {
    const int n = g.n_nodes();
    const Eigen::VectorXd& deg = g.degrees();
    for (int i = 0; i < n; ++i)
        if (deg[i] <= 0.0)
            throw ValidationError("node " + std::to_string(i) +
                                  " has degree 0; normalized Laplacian undefined");
    Eigen::VectorXd inv_sqrt = deg.array().rsqrt();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    lap.diagonal().setOnes();
    for (const Edge& e : g.edges()) {
        const double off = -e.w * inv_sqrt[e.u] * inv_sqrt[e.v];
        lap(e.u, e.v) = off;
        lap(e.v, e.u) = off;
    }
    return lap;
}

Eigen::MatrixXd laplacian(const Graph& g) {
    const int n = g.n_nodes();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : g.edges()) {
        lap(e.u, e.v) -= e.w;
        lap(e.v, e.u) -= e.w;
        lap(e.u, e.u) += e.w;
        lap(e.v, e.v) += e.w;
    }
    return lap;
}

} // namespace specloc

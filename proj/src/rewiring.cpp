#include "specloc/rewiring.hpp"

#include "specloc/errors.hpp"
#include "specloc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unordered_set>
#include <vector>

namespace specloc {

AddCandidateRule add_rule_from_string(const std::string& name) {
    if (name == "uniform-nonneighbor" || name == "uniform_nonneighbor" || name == "uniform")
        return AddCandidateRule::uniform_nonneighbor;
    if (name == "two-hop" || name == "two_hop")
        return AddCandidateRule::two_hop;
    throw ValidationError("unknown add-candidate rule '" + name + "'");
}

std::string to_string(AddCandidateRule rule) {
    return rule == AddCandidateRule::two_hop ? "two_hop" : "uniform_nonneighbor";
}

namespace {

double stable_sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_probability_inputs(double k, double mean_k, double alpha) {
    if (!std::isfinite(k) || !std::isfinite(mean_k) || !std::isfinite(alpha))
        throw ValidationError("drop/add probability requires finite inputs");
    if (alpha <= 0.0) throw ValidationError("alpha must be > 0");
}

} // namespace

double drop_probability(double k, double mean_k, double alpha) {
    check_probability_inputs(k, mean_k, alpha);
    return stable_sigmoid(alpha * (k - mean_k));
}

double add_probability(double k, double mean_k, double alpha) {
    check_probability_inputs(k, mean_k, alpha);
    return stable_sigmoid(-alpha * (k - mean_k));
}

namespace {

constexpr std::uint64_t kDropStream = rng::tag("rewire.drop");
constexpr std::uint64_t kAddStream = rng::tag("rewire.add");
constexpr std::uint64_t kPickStream = rng::tag("rewire.pick");

std::vector<int> two_hop_candidates(const Graph& g, int node) {
    std::unordered_set<int> excluded(g.neighbors()[node].begin(), g.neighbors()[node].end());
    excluded.insert(node);
    std::unordered_set<int> found;
    for (int nbr : g.neighbors()[node])
        for (int nn : g.neighbors()[nbr])
            if (!excluded.count(nn)) found.insert(nn);
    std::vector<int> candidates(found.begin(), found.end());
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

std::vector<int> nonneighbor_candidates(const Graph& g, int node) {
    std::vector<int> candidates;
    const auto& nbrs = g.neighbors()[node];
    for (int v = 0; v < g.n_nodes(); ++v) {
        if (v == node) continue;
        if (std::binary_search(nbrs.begin(), nbrs.end(), v)) continue;
        candidates.push_back(v);
    }
    return candidates;
}

double added_edge_weight(const Graph& g, int node) {
    const auto& nbrs = g.neighbors()[node];
    if (nbrs.empty()) return 1.0;
    return g.degrees()[node] / static_cast<double>(nbrs.size());
}

} // namespace

Graph rewire_step(const Graph& g, const RewireConfig& cfg, int layer, RewireStepInfo* info) {
    if (cfg.alpha <= 0.0) throw ValidationError("rewire alpha must be > 0");
    if (layer < 0) throw ValidationError("rewire layer must be >= 0");

    const Eigen::VectorXd& deg = g.degrees();
    const double mean_k = deg.sum() / static_cast<double>(g.n_nodes());
    RewireStepInfo counters;

    // Drop pass: decisions are indexed by (seed, layer, from, to) so each
    // directed incidence draws its own uniform; the union of drops removes
    // the edge.
    std::map<std::pair<int, int>, double> kept;
    for (const Edge& e : g.edges()) {
        bool removed = false;
        if (deg[e.u] > mean_k) {
            const double p = drop_probability(deg[e.u], mean_k, cfg.alpha);
            removed |= rng::unit_at(cfg.seed, kDropStream, layer, e.u, e.v) < p;
        }
        if (!removed && deg[e.v] > mean_k) {
            const double p = drop_probability(deg[e.v], mean_k, cfg.alpha);
            removed |= rng::unit_at(cfg.seed, kDropStream, layer, e.v, e.u) < p;
        }
        if (removed)
            ++counters.edges_dropped;
        else
            kept[{e.u, e.v}] = e.w;
    }

    // Add pass: each below-mean node may attach one non-neighbor of the
    // original graph, so adds never collide with kept or dropped edges.
    for (int i = 0; i < g.n_nodes(); ++i) {
        if (!(deg[i] < mean_k)) continue;
        const double p = add_probability(deg[i], mean_k, cfg.alpha);
        if (rng::unit_at(cfg.seed, kAddStream, layer, i) >= p) continue;

        std::vector<int> candidates;
        if (cfg.add_rule == AddCandidateRule::two_hop) {
            candidates = two_hop_candidates(g, i);
            if (candidates.empty()) {
                ++counters.two_hop_fallbacks;
                candidates = nonneighbor_candidates(g, i);
            }
        } else {
            candidates = nonneighbor_candidates(g, i);
        }
        if (candidates.empty()) {
            ++counters.add_candidates_exhausted;
            continue;
        }
        auto gen = rng::engine(cfg.seed, kPickStream, layer, i);
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        const int j = candidates[pick(gen)];
        const auto key = std::minmax(i, j);
        if (!kept.count(key)) {
            kept[key] = added_edge_weight(g, i);
            ++counters.edges_added;
        }
    }

    std::vector<Edge> edges;
    edges.reserve(kept.size());
    for (const auto& [key, w] : kept) edges.push_back({key.first, key.second, w});
    if (info) *info = counters;
    return Graph::from_edges(g.n_nodes(), std::move(edges));
}

} // namespace specloc

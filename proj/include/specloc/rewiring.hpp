#pragma once

#include "specloc/graph.hpp"

#include <cstdint>
#include <string>

namespace specloc {

/// How a low-degree node picks the non-neighbor it may attach to.
enum class AddCandidateRule { uniform_nonneighbor, two_hop };

AddCandidateRule add_rule_from_string(const std::string& name);
std::string to_string(AddCandidateRule rule);

/// Degree-gated stochastic rewiring parameters. alpha > 0 controls how
/// sharply the drop/add probabilities react to the degree's distance from
/// the mean; per_layer resamples the effective graph every layer.
struct RewireConfig {
    double alpha = 1.0;
    std::uint64_t seed = 0;
    AddCandidateRule add_rule = AddCandidateRule::uniform_nonneighbor;
    bool per_layer = true;
};

/// Probability that a node of degree k excludes one incident edge from
/// aggregation: sigmoid(alpha * (k - mean_k)), evaluated in a branch that
/// cannot overflow for large |alpha * (k - mean_k)|.
double drop_probability(double k, double mean_k, double alpha);

/// Probability that a node of degree k pulls in one non-neighbor:
/// sigmoid(-alpha * (k - mean_k)). Complements drop_probability to 1.
double add_probability(double k, double mean_k, double alpha);

/// Counters describing one rewiring step (candidate-rule fallbacks are
/// reported here rather than treated as errors).
struct RewireStepInfo {
    int edges_dropped = 0;
    int edges_added = 0;
    int two_hop_fallbacks = 0;
    int add_candidates_exhausted = 0;
};

/// One-step effective graph. Nodes with degree strictly above the mean
/// drop each incident edge independently with drop_probability (an edge
/// disappears if either endpoint drops it); nodes strictly below the mean
/// add one candidate non-neighbor with add_probability. Nodes at exactly
/// the mean degree are untouched. mean_k always refers to the original
/// graph. Pure function of (g, cfg.seed, layer, cfg); the result has no
/// self-loops and no duplicate edges and may contain isolated nodes.
Graph rewire_step(const Graph& g, const RewireConfig& cfg, int layer,
                  RewireStepInfo* info = nullptr);

} // namespace specloc

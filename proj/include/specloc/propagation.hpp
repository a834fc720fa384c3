#pragma once

#include "specloc/graph.hpp"
#include "specloc/rewiring.hpp"
#include "specloc/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace specloc {

/// Aggregation operators for weightless linear message passing.
/// laplacian_complement = I - L_sym = D^{-1/2} A D^{-1/2} shares its
/// eigenvectors with the normalized Laplacian, so per-band bookkeeping is
/// exact; gcn_selfloop = Dt^{-1/2} (A + I) Dt^{-1/2} is the usual
/// self-loop baseline with spectrum in (-1, 1].
enum class Operator { laplacian_complement, gcn_selfloop };

enum class Nonlinearity { none, relu };

Operator operator_from_string(const std::string& name);
std::string to_string(Operator op);
Nonlinearity nonlinearity_from_string(const std::string& name);
std::string to_string(Nonlinearity nl);

struct PropagationConfig {
    Operator op = Operator::laplacian_complement;
    int depth = 0;
    Nonlinearity nonlinearity = Nonlinearity::none;
    int record_every = 1;  ///< metric capture stride; layers 0 and depth always recorded
};

/// Snapshot of the signal at one recorded layer. Band quantities live in
/// the eigenbasis of the *original* graph's normalized Laplacian even for
/// rewired runs, so runs stay comparable; degree fluctuation tracks the
/// layer's effective aggregation graph.
struct LayerMetrics {
    int layer = 0;
    Eigen::VectorXd coeff_norms;   ///< per band, ell-2 over channels
    Eigen::VectorXd band_p;        ///< per band participation, NaN where absent
    std::vector<bool> band_present;
    double dirichlet_energy = 0.0;     ///< sum over channels of x^T L x
    double feature_distance = 0.0;     ///< mean pairwise distance of degree-normalized rows
    double effective_degree_fluctuation = 0.0;
};

struct PropagationResult {
    std::vector<LayerMetrics> metrics;
    Eigen::MatrixXd final_signal;
    PropagationConfig config;
    bool rewired = false;
    bool bipartite = false;  ///< lambda = 2 present: the top band oscillates instead of decaying
    SpectralBasis basis;     ///< reference basis used for all band metrics
    RewireStepInfo rewire_totals;
};

/// Dense aggregation operator for a static run. Requires no isolated
/// nodes (ValidationError naming the node otherwise).
Eigen::MatrixXd build_operator(const Graph& g, Operator op);

/// Run depth layers of signal_{l+1} = nonlinearity(P_l signal_l), where
/// P_l is the static operator or, when rewire is given, the operator of
/// rewire_step's effective graph (resampled per layer if cfg.per_layer).
/// Metrics are recorded at layers {0, record_every, 2*record_every, ...}
/// plus depth. NaN/Inf mid-run raises NumericError naming the layer.
PropagationResult propagate(const Graph& g,
                            const Eigen::MatrixXd& signal0,
                            const PropagationConfig& cfg,
                            const std::optional<RewireConfig>& rewire = std::nullopt);

/// Fraction of total coefficient energy carried by bands with
/// eigenvalue > threshold; NaN when the snapshot has no energy at all.
double band_energy_fraction_above(const Eigen::VectorXd& eigenvalues,
                                  const LayerMetrics& metrics,
                                  double threshold);

/// Per-band comparison of observed coefficient norms against the exact
/// linear decay |1 - lambda|^layer * initial_norm.
struct DecayReport {
    Eigen::VectorXd max_residual;  ///< worst |observed - predicted| per band
    double worst_residual = 0.0;
    double worst_tolerance = 0.0;
    int worst_band = -1;
    int worst_layer = -1;
    bool ok = true;  ///< every residual within 1e-8 * (1 + |predicted|)
};

/// Verify the spectral decay law on a recorded run. Only applicable to
/// linear (none) runs with the static laplacian_complement operator and
/// no rewiring; anything else raises ValidationError.
DecayReport coefficient_decay_check(const SpectralBasis& basis,
                                    const PropagationResult& result);

} // namespace specloc

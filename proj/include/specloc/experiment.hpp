#pragma once

#include "specloc/propagation.hpp"
#include "specloc/rewiring.hpp"

#include <string>
#include <vector>

namespace specloc {

/// Per-recorded-layer ensemble summary.
struct SeriesSummary {
    Eigen::VectorXd mean;
    Eigen::VectorXd stderr_of_mean;  ///< NaN when trials == 1
};

/// Paired baseline-vs-rewired comparison. The verdict rows report deltas
/// with confidence intervals at the final recorded layer; nothing here is
/// a pass/fail judgment.
struct RewireExperimentReport {
    std::vector<int> layers;
    int trials = 0;
    Eigen::VectorXd eigenvalues;  ///< band axis for the participation tables

    Eigen::VectorXd baseline_delta_k;
    Eigen::VectorXd baseline_feature_distance;
    Eigen::VectorXd baseline_high_band_fraction;
    Eigen::MatrixXd baseline_band_p;  ///< layers x bands, NaN where absent

    SeriesSummary delta_k;
    SeriesSummary feature_distance;
    SeriesSummary high_band_fraction;
    Eigen::MatrixXd band_p_mean;    ///< NaN-skipping mean over trials
    Eigen::MatrixXd band_p_stderr;
    Eigen::MatrixXd band_present_fraction;

    struct VerdictRow {
        std::string metric;
        double baseline = 0.0;
        double rewired_mean = 0.0;
        double delta = 0.0;
        double stderr_of_mean = 0.0;
        double ci95_low = 0.0;
        double ci95_high = 0.0;
    };
    std::vector<VerdictRow> verdict;

    RewireStepInfo rewire_totals;  ///< summed over trials and layers
    bool bipartite = false;
};

/// Run the same propagation with and without degree-gated rewiring over
/// `trials` independent rewire seeds (trial t uses a substream of
/// rcfg.seed) and summarize per-layer effective degree fluctuation, band
/// participation, high-band (lambda > 1) energy fraction and feature
/// distance. Trials execute in parallel under the SPECLOC_THREADS budget.
RewireExperimentReport disorder_reduction_experiment(const Graph& g,
                                                     const Eigen::MatrixXd& signal0,
                                                     const PropagationConfig& cfg,
                                                     const RewireConfig& rcfg,
                                                     int trials);

} // namespace specloc

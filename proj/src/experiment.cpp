#include "specloc/experiment.hpp"

#include "specloc/errors.hpp"
#include "specloc/parallel.hpp"
#include "specloc/rng.hpp"

#include <cmath>
#include <limits>

namespace specloc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TrialSeries {
    Eigen::VectorXd delta_k;
    Eigen::VectorXd feature_distance;
    Eigen::VectorXd high_band_fraction;
    Eigen::MatrixXd band_p;  // layers x bands, NaN absent
    RewireStepInfo totals;
};

TrialSeries extract(const PropagationResult& run, const Eigen::VectorXd& eigenvalues) {
    const int layers = static_cast<int>(run.metrics.size());
    const int bands = static_cast<int>(eigenvalues.size());
    TrialSeries s;
    s.delta_k.resize(layers);
    s.feature_distance.resize(layers);
    s.high_band_fraction.resize(layers);
    s.band_p.setConstant(layers, bands, kNaN);
    for (int l = 0; l < layers; ++l) {
        const LayerMetrics& m = run.metrics[l];
        s.delta_k[l] = m.effective_degree_fluctuation;
        s.feature_distance[l] = m.feature_distance;
        s.high_band_fraction[l] = band_energy_fraction_above(eigenvalues, m, 1.0);
        for (int b = 0; b < bands; ++b)
            if (m.band_present[b]) s.band_p(l, b) = m.band_p[b];
    }
    s.totals = run.rewire_totals;
    return s;
}

SeriesSummary summarize(const std::vector<TrialSeries>& trials,
                        Eigen::VectorXd TrialSeries::*field) {
    const int layers = static_cast<int>((trials[0].*field).size());
    const int t = static_cast<int>(trials.size());
    SeriesSummary out;
    out.mean.resize(layers);
    out.stderr_of_mean.resize(layers);
    for (int l = 0; l < layers; ++l) {
        double sum = 0.0;
        for (const auto& trial : trials) sum += (trial.*field)[l];
        const double mean = sum / t;
        out.mean[l] = mean;
        if (t < 2) {
            out.stderr_of_mean[l] = kNaN;
            continue;
        }
        double ss = 0.0;
        for (const auto& trial : trials) {
            const double d = (trial.*field)[l] - mean;
            ss += d * d;
        }
        out.stderr_of_mean[l] = std::sqrt(ss / (t - 1)) / std::sqrt(static_cast<double>(t));
    }
    return out;
}

} // namespace

RewireExperimentReport disorder_reduction_experiment(const Graph& g,
                                                     const Eigen::MatrixXd& signal0,
                                                     const PropagationConfig& cfg,
                                                     const RewireConfig& rcfg,
                                                     int trials) {
    if (trials < 1) throw ValidationError("experiment requires trials >= 1");

    const PropagationResult baseline = propagate(g, signal0, cfg, std::nullopt);
    const Eigen::VectorXd eigenvalues = baseline.basis.eigenvalues;
    const TrialSeries baseline_series = extract(baseline, eigenvalues);

    std::vector<TrialSeries> rewired(trials);
    parallel_for(trials, [&](int t) {
        RewireConfig trial_cfg = rcfg;
        trial_cfg.seed = rng::substream(rcfg.seed, rng::tag("trial"), t);
        rewired[t] = extract(propagate(g, signal0, cfg, trial_cfg), eigenvalues);
    });

    RewireExperimentReport report;
    report.trials = trials;
    report.eigenvalues = eigenvalues;
    report.bipartite = baseline.bipartite;
    report.layers.reserve(baseline.metrics.size());
    for (const LayerMetrics& m : baseline.metrics) report.layers.push_back(m.layer);

    report.baseline_delta_k = baseline_series.delta_k;
    report.baseline_feature_distance = baseline_series.feature_distance;
    report.baseline_high_band_fraction = baseline_series.high_band_fraction;
    report.baseline_band_p = baseline_series.band_p;

    report.delta_k = summarize(rewired, &TrialSeries::delta_k);
    report.feature_distance = summarize(rewired, &TrialSeries::feature_distance);
    report.high_band_fraction = summarize(rewired, &TrialSeries::high_band_fraction);

    const int layers = static_cast<int>(report.layers.size());
    const int bands = static_cast<int>(eigenvalues.size());
    report.band_p_mean.setConstant(layers, bands, kNaN);
    report.band_p_stderr.setConstant(layers, bands, kNaN);
    report.band_present_fraction.setZero(layers, bands);
    for (int l = 0; l < layers; ++l) {
        for (int b = 0; b < bands; ++b) {
            double sum = 0.0;
            int count = 0;
            for (const auto& trial : rewired) {
                const double v = trial.band_p(l, b);
                if (!std::isnan(v)) {
                    sum += v;
                    ++count;
                }
            }
            report.band_present_fraction(l, b) =
                static_cast<double>(count) / static_cast<double>(trials);
            if (count == 0) continue;
            const double mean = sum / count;
            report.band_p_mean(l, b) = mean;
            if (count >= 2) {
                double ss = 0.0;
                for (const auto& trial : rewired) {
                    const double v = trial.band_p(l, b);
                    if (!std::isnan(v)) ss += (v - mean) * (v - mean);
                }
                report.band_p_stderr(l, b) =
                    std::sqrt(ss / (count - 1)) / std::sqrt(static_cast<double>(count));
            }
        }
    }

    for (const auto& trial : rewired) {
        report.rewire_totals.edges_dropped += trial.totals.edges_dropped;
        report.rewire_totals.edges_added += trial.totals.edges_added;
        report.rewire_totals.two_hop_fallbacks += trial.totals.two_hop_fallbacks;
        report.rewire_totals.add_candidates_exhausted += trial.totals.add_candidates_exhausted;
    }

    const int last = layers - 1;
    auto verdict_row = [&](const std::string& name, double base, const SeriesSummary& s) {
        RewireExperimentReport::VerdictRow row;
        row.metric = name;
        row.baseline = base;
        row.rewired_mean = s.mean[last];
        row.delta = s.mean[last] - base;
        row.stderr_of_mean = s.stderr_of_mean[last];
        const double half = 1.96 * s.stderr_of_mean[last];
        row.ci95_low = row.delta - half;
        row.ci95_high = row.delta + half;
        return row;
    };
    report.verdict.push_back(verdict_row("delta_k_effective",
                                         report.baseline_delta_k[last], report.delta_k));
    report.verdict.push_back(verdict_row("feature_distance",
                                         report.baseline_feature_distance[last],
                                         report.feature_distance));
    report.verdict.push_back(verdict_row("high_band_energy_fraction",
                                         report.baseline_high_band_fraction[last],
                                         report.high_band_fraction));
    return report;
}

} // namespace specloc

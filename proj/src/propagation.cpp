#include "specloc/propagation.hpp"

#include "specloc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace specloc {

Operator operator_from_string(const std::string& name) {
    if (name == "laplacian-complement" || name == "laplacian_complement")
        return Operator::laplacian_complement;
    if (name == "gcn-selfloop" || name == "gcn_selfloop")
        return Operator::gcn_selfloop;
    throw ValidationError("unknown operator '" + name + "'");
}

std::string to_string(Operator op) {
    return op == Operator::laplacian_complement ? "laplacian_complement" : "gcn_selfloop";
}

Nonlinearity nonlinearity_from_string(const std::string& name) {
    if (name == "none") return Nonlinearity::none;
    if (name == "relu") return Nonlinearity::relu;
    throw ValidationError("unknown nonlinearity '" + name + "'");
}

std::string to_string(Nonlinearity nl) {
    return nl == Nonlinearity::none ? "none" : "relu";
}

namespace {

void require_no_isolated(const Graph& g) {
    const Eigen::VectorXd& deg = g.degrees();
    for (int i = 0; i < g.n_nodes(); ++i)
        if (deg[i] <= 0.0)
            throw ValidationError("node " + std::to_string(i) +
                                  " is isolated; aggregation operator undefined");
}

/// D^{-1/2} A D^{-1/2} with zero rows/cols for isolated nodes. Used for
/// effective graphs mid-rewire, where a node that dropped all its edges
/// simply aggregates nothing that layer.
Eigen::MatrixXd normalized_adjacency_tolerant(const Graph& g) {
    const int n = g.n_nodes();
    Eigen::VectorXd scale(n);
    for (int i = 0; i < n; ++i) {
        const double d = g.degrees()[i];
        scale[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : g.edges()) {
        const double val = e.w * scale[e.u] * scale[e.v];
        op(e.u, e.v) = val;
        op(e.v, e.u) = val;
    }
    return op;
}

Eigen::MatrixXd gcn_selfloop_operator(const Graph& g) {
    const int n = g.n_nodes();
    Eigen::VectorXd deg_tilde = g.degrees().array() + 1.0;
    Eigen::VectorXd scale = deg_tilde.array().rsqrt();
    Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) op(i, i) = scale[i] * scale[i];
    for (const Edge& e : g.edges()) {
        const double val = e.w * scale[e.u] * scale[e.v];
        op(e.u, e.v) = val;
        op(e.v, e.u) = val;
    }
    return op;
}

Eigen::MatrixXd effective_operator(const Graph& g, Operator op) {
    return op == Operator::laplacian_complement ? normalized_adjacency_tolerant(g)
                                                : gcn_selfloop_operator(g);
}

/// Mean pairwise distance of rows rescaled by 1/sqrt(d_i) of the reference
/// graph. Under I - L_sym the rescaled rows converge to a common value as
/// the zero band takes over, so this goes to zero exactly when the run
/// homogenizes.
double feature_distance(const Eigen::MatrixXd& signal, const Eigen::VectorXd& inv_sqrt_deg) {
    const int n = static_cast<int>(signal.rows());
    if (n < 2) return 0.0;
    Eigen::MatrixXd z = inv_sqrt_deg.asDiagonal() * signal;
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) total += (z.row(i) - z.row(j)).norm();
    return total / (0.5 * n * (n - 1));
}

LayerMetrics snapshot(int layer,
                      const Eigen::MatrixXd& signal,
                      const SpectralBasis& basis,
                      const Eigen::MatrixXd& lap,
                      const Eigen::VectorXd& inv_sqrt_deg,
                      double effective_dk) {
    LayerMetrics m;
    m.layer = layer;
    const int n = basis.size();
    const Eigen::MatrixXd coeffs = basis.eigenvectors.transpose() * signal;
    m.coeff_norms = coeffs.rowwise().norm();
    m.band_p.setConstant(n, std::numeric_limits<double>::quiet_NaN());
    m.band_present.assign(n, false);
    const double dead = kBandDeadThreshold * signal.norm();
    for (int b = 0; b < n; ++b) {
        if (m.coeff_norms[b] < dead || m.coeff_norms[b] == 0.0) continue;
        m.band_present[b] = true;
        m.band_p[b] = participation_ratio(basis.eigenvectors.col(b));
    }
    m.dirichlet_energy = (signal.transpose() * (lap * signal)).trace();
    m.feature_distance = feature_distance(signal, inv_sqrt_deg);
    m.effective_degree_fluctuation = effective_dk;
    return m;
}

} // namespace

Eigen::MatrixXd build_operator(const Graph& g, Operator op) {
    require_no_isolated(g);
    return effective_operator(g, op);
}

PropagationResult propagate(const Graph& g,
                            const Eigen::MatrixXd& signal0,
                            const PropagationConfig& cfg,
                            const std::optional<RewireConfig>& rewire) {
    if (signal0.rows() != g.n_nodes())
        throw ValidationError("signal has " + std::to_string(signal0.rows()) +
                              " rows for a graph of " + std::to_string(g.n_nodes()) + " nodes");
    if (cfg.depth < 0) throw ValidationError("depth must be >= 0");
    if (cfg.record_every < 1) throw ValidationError("record_every must be >= 1");
    if (!signal0.allFinite()) throw NumericError("initial signal contains NaN/Inf");

    const Eigen::MatrixXd lap = normalized_laplacian(g);
    PropagationResult result;
    result.config = cfg;
    result.rewired = rewire.has_value();
    result.basis = eigendecompose(lap);
    result.bipartite = result.basis.eigenvalues[result.basis.size() - 1] > 2.0 - 1e-9;

    const Eigen::VectorXd inv_sqrt_deg = g.degrees().array().rsqrt();
    const double base_dk = degree_fluctuation(g);

    std::set<int> record = {0, cfg.depth};
    for (int l = cfg.record_every; l < cfg.depth; l += cfg.record_every) record.insert(l);

    Eigen::MatrixXd signal = signal0;
    Eigen::MatrixXd static_op;
    if (!rewire) static_op = build_operator(g, cfg.op);

    Graph effective;
    Eigen::MatrixXd layer_op;
    double effective_dk = base_dk;
    if (rewire && !rewire->per_layer) {
        RewireStepInfo info;
        effective = rewire_step(g, *rewire, 0, &info);
        result.rewire_totals = info;
        layer_op = effective_operator(effective, cfg.op);
        effective_dk = degree_fluctuation(effective);
    }

    result.metrics.push_back(
        snapshot(0, signal, result.basis, lap, inv_sqrt_deg,
                 rewire && !rewire->per_layer ? effective_dk : base_dk));

    for (int layer = 0; layer < cfg.depth; ++layer) {
        const Eigen::MatrixXd* op = &static_op;
        if (rewire) {
            if (rewire->per_layer) {
                RewireStepInfo info;
                effective = rewire_step(g, *rewire, layer, &info);
                result.rewire_totals.edges_dropped += info.edges_dropped;
                result.rewire_totals.edges_added += info.edges_added;
                result.rewire_totals.two_hop_fallbacks += info.two_hop_fallbacks;
                result.rewire_totals.add_candidates_exhausted += info.add_candidates_exhausted;
                layer_op = effective_operator(effective, cfg.op);
                effective_dk = degree_fluctuation(effective);
            }
            op = &layer_op;
        }
        signal = (*op) * signal;
        if (cfg.nonlinearity == Nonlinearity::relu) signal = signal.cwiseMax(0.0);
        if (!signal.allFinite())
            throw NumericError("NaN/Inf in signal at layer " + std::to_string(layer + 1));
        if (record.count(layer + 1))
            result.metrics.push_back(snapshot(layer + 1, signal, result.basis, lap,
                                              inv_sqrt_deg,
                                              rewire ? effective_dk : base_dk));
    }
    result.final_signal = std::move(signal);
    return result;
}

double band_energy_fraction_above(const Eigen::VectorXd& eigenvalues,
                                  const LayerMetrics& metrics,
                                  double threshold) {
    const double total = metrics.coeff_norms.squaredNorm();
    if (total == 0.0) return std::numeric_limits<double>::quiet_NaN();
    double high = 0.0;
    for (int b = 0; b < eigenvalues.size(); ++b)
        if (eigenvalues[b] > threshold) high += metrics.coeff_norms[b] * metrics.coeff_norms[b];
    return high / total;
}

DecayReport coefficient_decay_check(const SpectralBasis& basis,
                                    const PropagationResult& result) {
    if (result.config.nonlinearity != Nonlinearity::none)
        throw ValidationError("decay check inapplicable: run used a nonlinearity");
    if (result.rewired)
        throw ValidationError("decay check inapplicable: run was rewired");
    if (result.config.op != Operator::laplacian_complement)
        throw ValidationError("decay check inapplicable: run did not use laplacian_complement");
    if (result.metrics.empty() || result.metrics.front().layer != 0)
        throw ValidationError("decay check requires metrics starting at layer 0");

    const int n = basis.size();
    const Eigen::VectorXd& initial = result.metrics.front().coeff_norms;
    DecayReport report;
    report.max_residual = Eigen::VectorXd::Zero(n);
    for (const LayerMetrics& m : result.metrics) {
        for (int b = 0; b < n; ++b) {
            const double rate = std::abs(1.0 - basis.eigenvalues[b]);
            const double predicted = std::pow(rate, m.layer) * initial[b];
            const double residual = std::abs(m.coeff_norms[b] - predicted);
            const double tolerance = 1e-8 * (1.0 + std::abs(predicted));
            if (residual > report.max_residual[b]) report.max_residual[b] = residual;
            if (residual > tolerance) {
                report.ok = false;
                if (residual > report.worst_residual) {
                    report.worst_residual = residual;
                    report.worst_tolerance = tolerance;
                    report.worst_band = b;
                    report.worst_layer = m.layer;
                }
            }
        }
    }
    if (report.ok) {
        // still surface the largest residual for the report
        for (int b = 0; b < n; ++b) {
            if (report.max_residual[b] > report.worst_residual) {
                report.worst_residual = report.max_residual[b];
                report.worst_band = b;
            }
        }
    }
    return report;
}

} // namespace specloc
